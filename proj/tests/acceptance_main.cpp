// Runs the acceptance criteria and prints one line per criterion.
//
//   acceptance [id ...]
//
// PRANDTL_ACCEPT_SNAPSHOTS=<dir> reuses a stored run instead of simulating.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "prandtl/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace prandtl::acceptance;
  Options options;
  for (int i = 1; i < argc; ++i) options.only.push_back(std::atoi(argv[i]));
  if (const char* dir = std::getenv("PRANDTL_ACCEPT_SNAPSHOTS"); dir != nullptr && *dir != '\0')
    options.snapshot_dir = dir;
  try {
    const auto results = run_all(options);
    std::fputs(format_table(results).c_str(), stdout);
    int failed = 0;
    for (const auto& c : results) failed += c.passed ? 0 : 1;
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 2;
  }
}
