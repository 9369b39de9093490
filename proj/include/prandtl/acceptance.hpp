#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "prandtl/solver.hpp"

namespace prandtl::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;  // 0: no budget
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;
};

struct Options {
  SolverConfig simulation = default_simulation();
  // Reuse a stored run (snapshots plus series.csv) instead of simulating.
  std::filesystem::path snapshot_dir;
  // Store the simulated run here when non-empty.
  std::filesystem::path save_dir;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency capped by PRANDTL_LAB_THREADS
  std::vector<int> only;  // empty: all ten

  static SolverConfig default_simulation();
};

// Number of workers: the request, else hardware concurrency, capped by the
// PRANDTL_LAB_THREADS environment variable when set.
unsigned worker_count(unsigned requested);

// Sum of four Gaussians with random amplitudes, centres and widths.
Field random_smooth_field(const GridPtr& grid, std::mt19937_64& rng);

CriterionResult profile_exactness();
CriterionResult support_constants();
CriterionResult profile_asymptotics();
CriterionResult profile_equation_residual();
CriterionResult spectrum();
CriterionResult nonlocal_oracles();
CriterionResult property_suites(std::uint64_t seed);

struct SimulationData {
  std::vector<SeriesRow> series;
  std::vector<SolverState> snapshots;
  double seconds = 0.0;
  bool loaded = false;
};

SimulationData obtain_simulation(const Options& options);

CriterionResult blowup_rates(const SimulationData& data);
CriterionResult quadratic_law(const SimulationData& data);
CriterionResult modulation_laws(const SimulationData& data);

// Runs the selected criteria, independent ones concurrently; results are
// ordered by id.
std::vector<CriterionResult> run_all(const Options& options);

std::string format_table(const std::vector<CriterionResult>& results);

}  // namespace prandtl::acceptance
