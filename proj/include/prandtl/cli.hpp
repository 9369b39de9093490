#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace prandtl::cli {

// "0.1.0+<git describe>" when built from a checkout.
std::string version();

enum class PlotKind { rates, profile, kernel };

PlotKind parse_plot_kind(const std::string& name);

// Writes a standalone matplotlib script reading only the given CSVs (paths
// stored relative to the script). The script is never executed. Missing
// CSVs raise FileError.
void emit_plot_script(const std::vector<std::filesystem::path>& csvs, PlotKind kind,
                      const std::filesystem::path& script);

// Exit codes: 0 success, 2 failed validation or domain error, 1 usage error.
int run(int argc, const char* const* argv);

}  // namespace prandtl::cli
