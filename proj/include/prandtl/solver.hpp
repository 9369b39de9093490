#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prandtl/grid.hpp"

namespace prandtl {

struct SolverConfig {
  double lambda0 = 4.0;
  double cfl = 0.2;
  double blowup_threshold = 0.0;  // 0 selects 1e5 * lambda0^2
  double perturbation_amplitude = 0.0;  // in units of lambda0^2
  double amplitude_scale = 1.0;         // multiplies the cos^2 bump
  std::uint64_t seed = 1;

  double grid_spacing = 0.1;
  double grid_stretch = 1.0;
  double y_max_factor = 4.0;  // initial y_max = factor * lambda0 * pi
  double remesh_peak_fraction = 0.6;
  double remesh_growth = 1.5;
  double remesh_band = 0.25;
  double truncation_threshold = 1e-8;

  double max_dt = 1e-2;
  std::size_t max_steps = 2'000'000;
  double snapshot_log_step = 0.05;  // snapshot when log(peak) grew by this much
  std::size_t snapshot_every = 0;   // if > 0, also snapshot every this many steps
  double series_log_step = 2e-3;

  // Debug switches for the individual terms.
  bool diffusion = true;
  bool reaction = true;
  bool transport = true;

  double threshold() const;
  void validate() const;
};

struct SolverState {
  double t = 0.0;
  double dt = 0.0;
  Field field;
  std::size_t step_count = 0;
  double peak_value = 0.0;
  double peak_location = 0.0;
};

SolverState make_state(Field field, double t = 0.0, std::size_t step_count = 0);

// Location of the maximum refined by a parabola through the discrete argmax
// and its neighbours.
double refined_peak_location(const Field& field);

struct SeriesRow {
  double t;
  double dt;
  double peak_value;
  double peak_location;
  double mass;
  double boundary_slope;
};

struct RunResult {
  std::vector<SeriesRow> series;
  std::vector<SolverState> snapshots;
  SolverState final_state;
  bool blew_up = false;
  std::size_t remesh_count = 0;
  std::string stop_reason;
};

struct BlowupFit {
  double T_est = 0.0;
  double amp_exponent = 0.0;
  double peak_exponent = 0.0;
  double r2_amp = 0.0;
  double r2_peak = 0.0;
  double r2_inverse = 0.0;  // linear fit of 1/peak vs t over the last decade
  double window_start = 0.0;
  std::size_t window_points = 0;
};

struct FitOptions {
  double t_decades = 1.0;     // decades of peak growth used for T_est
  double fit_decades = 2.0;   // decades of peak growth used for the exponents
  double min_decades = 2.0;
};

// lambda0^2 cos^2((y - lambda0 pi)/(2 lambda0)) on [0, 2 lambda0 pi], zero
// beyond, plus the optional perturbation. The value at y = 0 is set to 0.
Field initial_datum(double lambda0, const GridPtr& grid, const std::optional<Field>& tilde = {});

// Smooth random bump supported in [lo, hi] with sup norm `amplitude`.
Field random_perturbation(const GridPtr& grid, double amplitude, double lo, double hi,
                          std::uint64_t seed);

// One IMEX step: implicit diffusion, explicit reaction and upwind transport.
// dt is chosen from the CFL rule; on non-finite output dt is halved, up to
// 10 times, before InstabilityError is raised.
SolverState step(const SolverState& state, const SolverConfig& config);

// Same with a prescribed dt (no CFL selection, no retry).
SolverState step_fixed(const SolverState& state, const SolverConfig& config, double dt);

double cfl_dt(const Field& field, const SolverConfig& config);

using ProgressCallback = std::function<void(const SolverState&)>;

RunResult run_until_blowup(const SolverConfig& config, const ProgressCallback& progress = {});

BlowupFit fit_blowup(std::span<const SeriesRow> series, const FitOptions& options = {});

struct RescaledProfile {
  Field profile;  // F(Z) on a uniform grid in [-pi, pi]
  double lambda = 0.0;
  double mu = 0.0;
  double y_star = 0.0;
};

// Half-width at half-maximum of the peak, from the two crossings.
double half_width_half_max(const Field& field);

RescaledProfile rescaled_snapshot(const SolverState& state, std::size_t points = 721);

// sup |F - cos^2(Z/2)| on |Z| <= fraction * pi.
double profile_deviation(const RescaledProfile& profile, double fraction = 0.9);

struct RegularityReport {
  std::vector<double> times;
  std::vector<double> sup_xi;
  std::vector<double> sup_dxi;
  double sup_norm = 0.0;           // sup over time of the W^{1,inf} norm on the window
  double final_decade_growth = 0.0;  // max over final decade / max before it
  double quadratic_coeff = 0.0;
  double loglog_exponent = 0.0;
  double mu_proxy = 0.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
};

struct RegularityOptions {
  double y_window = 0.5;
  double fit_lo_fraction = 0.02;  // of the final peak location
  double fit_hi_fraction = 0.1;
};

RegularityReport compact_regularity_probe(std::span<const SolverState> snapshots,
                                          const RegularityOptions& options = {});

// Least-squares line y = a + b x; returns {a, b, r2}.
struct LineFit {
  double intercept;
  double slope;
  double r2;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace prandtl
