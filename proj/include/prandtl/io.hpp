#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "prandtl/solver.hpp"

namespace prandtl::io {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // FileError if missing
  std::vector<double> values(const std::string& name) const;
};

// Comma separated, header row, 17 significant digits.
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

// Flat key=value file; '#' starts a comment, blank lines are ignored.
std::map<std::string, std::string> read_config(const std::filesystem::path& path);

void ensure_directory(const std::filesystem::path& dir);
void write_text(const std::filesystem::path& path, const std::string& text);

std::string format_double(double v);

// snapshots.csv (index, t, peak_value, peak_location, file) plus one
// snapshot_NNNNN.csv (y, xi) per state.
void write_snapshots(const std::filesystem::path& dir, const std::vector<SolverState>& snapshots);
std::vector<SolverState> read_snapshots(const std::filesystem::path& dir);

Table series_table(const std::vector<SeriesRow>& series);
std::vector<SeriesRow> read_series(const std::filesystem::path& path);

}  // namespace prandtl::io
