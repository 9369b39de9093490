#include "prandtl/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prandtl/errors.hpp"

namespace prandtl::io {

namespace fs = std::filesystem;

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw FileError("missing CSV column '" + name + "'");
}

std::vector<double> Table::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw FileError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw FileError("write failed: " + path.string());
}

void write_csv(const fs::path& path, const Table& table) {
  std::string text;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) text += ',';
    text += table.header[i];
  }
  text += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      text += format_double(row[i]);
    }
    text += '\n';
  }
  write_text(path, text);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const fs::path& path, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    // from_chars rejects "inf"/"nan" spellings some writers use; fall back.
    char* end = nullptr;
    v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << line << ": not a number: '" << t << "'";
      throw FileError(msg.str());
    }
  }
  return v;
}

}  // namespace

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path.string());
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw FileError("empty CSV file " + path.string());
  for (auto& h : split(line, ',')) table.header.push_back(trim(h));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != table.header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineno << ": expected " << table.header.size()
          << " columns, got " << cells.size();
      throw FileError(msg.str());
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, path, lineno));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::map<std::string, std::string> read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineno << ": expected key=value";
      throw FileError(msg.str());
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void write_snapshots(const fs::path& dir, const std::vector<SolverState>& snapshots) {
  ensure_directory(dir);
  Table index{{"index", "t", "peak_value", "peak_location"}, {}};
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const auto& s = snapshots[k];
    index.rows.push_back({static_cast<double>(k), s.t, s.peak_value, s.peak_location});
    Table snap{{"y", "xi"}, {}};
    snap.rows.reserve(s.field.size());
    for (std::size_t i = 0; i < s.field.size(); ++i) snap.rows.push_back({s.field.node(i), s.field[i]});
    char name[40];
    std::snprintf(name, sizeof name, "snapshot_%05zu.csv", k);
    write_csv(dir / name, snap);
  }
  write_csv(dir / "snapshots.csv", index);
}

std::vector<SolverState> read_snapshots(const fs::path& dir) {
  const Table index = read_csv(dir / "snapshots.csv");
  const auto idx = index.values("index");
  const auto t = index.values("t");
  std::vector<SolverState> out;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    char name[40];
    std::snprintf(name, sizeof name, "snapshot_%05zu.csv", static_cast<std::size_t>(idx[k]));
    const Table snap = read_csv(dir / name);
    auto grid = std::make_shared<const Grid>(snap.values("y"));
    out.push_back(make_state(Field(grid, snap.values("xi")), t[k]));
  }
  return out;
}

Table series_table(const std::vector<SeriesRow>& series) {
  Table t{{"t", "dt", "peak_value", "peak_location", "mass", "boundary_slope"}, {}};
  for (const auto& r : series)
    t.rows.push_back({r.t, r.dt, r.peak_value, r.peak_location, r.mass, r.boundary_slope});
  return t;
}

std::vector<SeriesRow> read_series(const fs::path& path) {
  const Table t = read_csv(path);
  const std::size_t ct = t.column("t"), cdt = t.column("dt"), cp = t.column("peak_value"),
                    cl = t.column("peak_location"), cm = t.column("mass"),
                    cb = t.column("boundary_slope");
  std::vector<SeriesRow> out;
  for (const auto& r : t.rows) out.push_back({r[ct], r[cdt], r[cp], r[cl], r[cm], r[cb]});
  return out;
}

}  // namespace prandtl::io
