#include "prandtl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "prandtl/errors.hpp"

namespace prandtl {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Workspace for repeated steps on one grid.
class Stepper {
 public:
  explicit Stepper(const SolverConfig& config) : config_(config) {}

  // Computes the transport velocity for v and returns the CFL time step.
  double choose_dt(const Grid& g, std::span<const double> v) {
    prepare(g);
    transport_velocity(g, v);
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    double dt = config_.max_dt;
    if (config_.reaction && vmax > 0.0) dt = std::min(dt, config_.cfl / vmax);
    if (config_.transport) {
      double rate = 0.0;
      for (std::size_t i = 1; i + 1 < g.size(); ++i)
        rate = std::max(rate, std::abs(u_[i]) / std::min(g.spacing(i - 1), g.spacing(i)));
      if (rate > 0.0) dt = std::min(dt, config_.cfl / rate);
    }
    return dt;
  }

  // Advances v by dt into out using the velocity from the last choose_dt
  // call; returns false if the result is not finite.
  bool advance(const Grid& g, std::span<const double> v, double dt, std::vector<double>& out) {
    const std::size_t n = g.size();
    auto x = g.nodes();
    out.assign(n, 0.0);
    // Explicit part.
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double rhs = v[i];
      if (config_.reaction) rhs += dt * v[i] * v[i];
      if (config_.transport) {
        const double u = u_[i];
        const double slope = u >= 0.0 ? (v[i] - v[i - 1]) / (x[i] - x[i - 1])
                                      : (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
        rhs -= dt * u * slope;
      }
      rhs_[i] = rhs;
    }
    // Implicit diffusion: (I - dt D2) out = rhs with out = 0 at both ends.
    if (!config_.diffusion) {
      for (std::size_t i = 1; i + 1 < n; ++i) out[i] = rhs_[i];
    } else {
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h1 = x[i] - x[i - 1];
        const double h2 = x[i + 1] - x[i];
        lower_[i] = -dt * 2.0 / (h1 * (h1 + h2));
        upper_[i] = -dt * 2.0 / (h2 * (h1 + h2));
        diag_[i] = 1.0 + dt * 2.0 / (h1 * h2);
      }
      lower_[1] = 0.0;
      upper_[n - 2] = 0.0;
      // Thomas algorithm on rows 1..n-2.
      cprime_[1] = upper_[1] / diag_[1];
      dprime_[1] = rhs_[1] / diag_[1];
      for (std::size_t i = 2; i + 1 < n; ++i) {
        const double m = diag_[i] - lower_[i] * cprime_[i - 1];
        cprime_[i] = upper_[i] / m;
        dprime_[i] = (rhs_[i] - lower_[i] * dprime_[i - 1]) / m;
      }
      out[n - 2] = dprime_[n - 2];
      for (std::size_t i = n - 2; i-- > 1;) out[i] = dprime_[i] - cprime_[i] * out[i + 1];
    }
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for (double val : out)
      if (!std::isfinite(val)) return false;
    return true;
  }

 private:
  void prepare(const Grid& g) {
    const std::size_t n = g.size();
    if (u_.size() != n) {
      u_.assign(n, 0.0);
      rhs_.assign(n, 0.0);
      lower_.assign(n, 0.0);
      upper_.assign(n, 0.0);
      diag_.assign(n, 0.0);
      cprime_.assign(n, 0.0);
      dprime_.assign(n, 0.0);
    }
  }

  void transport_velocity(const Grid& g, std::span<const double> v) {
    auto x = g.nodes();
    u_[0] = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i)
      u_[i] = u_[i - 1] + 0.5 * (x[i] - x[i - 1]) * (v[i] + v[i - 1]);
  }

  const SolverConfig& config_;
  std::vector<double> u_, rhs_, lower_, upper_, diag_, cprime_, dprime_;
};

SolverState advance_with_retry(Stepper& stepper, const SolverState& state,
                               std::vector<double>& buffer) {
  const Grid& g = state.field.grid();
  double dt = stepper.choose_dt(g, state.field.values());
  for (int attempt = 0; attempt <= 10; ++attempt) {
    if (stepper.advance(g, state.field.values(), dt, buffer)) {
      SolverState next =
          make_state(Field(state.field.grid_ptr(), buffer), state.t + dt, state.step_count + 1);
      next.dt = dt;
      return next;
    }
    dt *= 0.5;
  }
  std::ostringstream msg;
  msg << "non-finite solution at t = " << state.t << " after 10 time-step halvings";
  throw InstabilityError(msg.str());
}

double boundary_slope(const Field& field) {
  const double x0 = field.node(0), x1 = field.node(1), x2 = field.node(2);
  const double h1 = x1 - x0, h2 = x2 - x1;
  return -(2 * h1 + h2) / (h1 * (h1 + h2)) * field[0] + (h1 + h2) / (h1 * h2) * field[1] -
         h1 / (h2 * (h1 + h2)) * field[2];
}

SeriesRow series_row(const SolverState& s) {
  return {s.t, s.dt, s.peak_value, s.peak_location, integrate(s.field), boundary_slope(s.field)};
}

}  // namespace

double SolverConfig::threshold() const {
  return blowup_threshold > 0.0 ? blowup_threshold : 1e5 * lambda0 * lambda0;
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw ParameterError("solver config: " + what); };
  if (!(lambda0 >= 2.0)) fail("lambda0 must be >= 2");
  if (!(cfl > 0.0 && cfl < 1.0)) fail("cfl must lie in (0, 1)");
  if (!(threshold() >= 1e4)) fail("blowup_threshold must be >= 1e4");
  if (!(grid_spacing > 0.0)) fail("grid_spacing must be positive");
  if (!(grid_stretch >= 1.0)) fail("grid_stretch must be >= 1");
  if (!(y_max_factor >= 3.0)) fail("y_max_factor must be >= 3");
  if (!(remesh_peak_fraction > 0.0 && remesh_peak_fraction < 1.0))
    fail("remesh_peak_fraction must lie in (0, 1)");
  if (!(remesh_growth > 1.0)) fail("remesh_growth must be > 1");
  if (!(remesh_band > 0.0 && remesh_band < 1.0)) fail("remesh_band must lie in (0, 1)");
  if (!(truncation_threshold > 0.0)) fail("truncation_threshold must be positive");
  if (!(max_dt > 0.0)) fail("max_dt must be positive");
  if (max_steps == 0) fail("max_steps must be positive");
  if (!(snapshot_log_step > 0.0)) fail("snapshot_log_step must be positive");
  if (!(series_log_step >= 0.0)) fail("series_log_step must be >= 0");
  if (!(perturbation_amplitude >= 0.0)) fail("perturbation_amplitude must be >= 0");
  if (!(amplitude_scale > 0.0)) fail("amplitude_scale must be positive");
}

double refined_peak_location(const Field& field) {
  const std::size_t i = field.argmax();
  if (i == 0 || i + 1 == field.size()) return field.node(i);
  const double x0 = field.node(i - 1), x1 = field.node(i), x2 = field.node(i + 1);
  const double y0 = field[i - 1], y1 = field[i], y2 = field[i + 1];
  const double d1 = (y1 - y0) / (x1 - x0);
  const double d2 = (y2 - y1) / (x2 - x1);
  const double curvature = (d2 - d1) / (x2 - x0);
  if (!(curvature < 0.0)) return x1;
  const double vertex = 0.5 * (x0 + x1) - d1 / (2.0 * curvature);
  return std::clamp(vertex, x0, x2);
}

SolverState make_state(Field field, double t, std::size_t step_count) {
  const double peak = field.max_value();
  const double loc = refined_peak_location(field);
  return SolverState{t, 0.0, std::move(field), step_count, peak, loc};
}

Field initial_datum(double lambda0, const GridPtr& grid, const std::optional<Field>& tilde) {
  if (!(lambda0 > 0.0)) throw ParameterError("lambda0 must be positive");
  if (grid->y_max() < 3.0 * lambda0 * kPi) {
    std::ostringstream msg;
    msg << "grid ends at " << grid->y_max() << ", need at least 3*lambda0*pi = "
        << 3.0 * lambda0 * kPi;
    throw ParameterError(msg.str());
  }
  if (tilde && !(tilde->grid() == *grid)) throw ParameterError("perturbation on a different grid");
  const double support = 2.0 * lambda0 * kPi;
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double y = (*grid)[i];
    if (y < support) {
      const double c = std::cos((y - lambda0 * kPi) / (2.0 * lambda0));
      v[i] = lambda0 * lambda0 * c * c;
    }
    if (tilde) v[i] += (*tilde)[i];
  }
  v.front() = 0.0;
  return Field(grid, std::move(v));
}

Field random_perturbation(const GridPtr& grid, double amplitude, double lo, double hi,
                          std::uint64_t seed) {
  if (!(hi > lo)) throw ParameterError("perturbation window must have hi > lo");
  std::mt19937_64 rng(seed);
  constexpr int kModes = 4;
  double coeff[kModes];
  for (double& c : coeff) c = 2.0 * uniform01(rng) - 1.0;
  std::vector<double> v(grid->size(), 0.0);
  double sup = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double y = (*grid)[i];
    if (y <= lo || y >= hi) continue;
    const double x = (y - lo) / (hi - lo);
    const double window = std::pow(std::sin(kPi * x), 2);
    double s = 0.0;
    for (int m = 0; m < kModes; ++m) s += coeff[m] * std::sin((m + 1) * kPi * x);
    v[i] = window * s;
    sup = std::max(sup, std::abs(v[i]));
  }
  if (sup > 0.0)
    for (double& x : v) x *= amplitude / sup;
  return Field(grid, std::move(v));
}

double cfl_dt(const Field& field, const SolverConfig& config) {
  Stepper stepper(config);
  return stepper.choose_dt(field.grid(), field.values());
}

SolverState step(const SolverState& state, const SolverConfig& config) {
  Stepper stepper(config);
  std::vector<double> buffer;
  return advance_with_retry(stepper, state, buffer);
}

SolverState step_fixed(const SolverState& state, const SolverConfig& config, double dt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  Stepper stepper(config);
  std::vector<double> buffer;
  stepper.choose_dt(state.field.grid(), state.field.values());
  if (!stepper.advance(state.field.grid(), state.field.values(), dt, buffer))
    throw InstabilityError("non-finite solution after a fixed step");
  SolverState next =
      make_state(Field(state.field.grid_ptr(), std::move(buffer)), state.t + dt, state.step_count + 1);
  next.dt = dt;
  return next;
}

RunResult run_until_blowup(const SolverConfig& config, const ProgressCallback& progress) {
  config.validate();
  const double h = config.grid_spacing;
  auto node_count = [&](double y_max) {
    return std::max<std::size_t>(Grid::kMinNodes,
                                 static_cast<std::size_t>(std::ceil(y_max / h)) + 1);
  };
  double y_max = config.y_max_factor * config.lambda0 * kPi;
  auto grid = build_grid(y_max, node_count(y_max), config.grid_stretch, config.lambda0 * kPi);
  std::optional<Field> tilde;
  if (config.perturbation_amplitude > 0.0)
    tilde = random_perturbation(grid, config.perturbation_amplitude * config.lambda0 * config.lambda0,
                                0.5 * config.lambda0 * kPi, 1.5 * config.lambda0 * kPi, config.seed);
  Field datum = initial_datum(config.lambda0, grid, tilde);
  if (config.amplitude_scale != 1.0) {
    std::vector<double> v(datum.values().begin(), datum.values().end());
    for (double& x : v) x *= config.amplitude_scale;
    datum = Field(grid, std::move(v));
  }
  SolverState state = make_state(std::move(datum));

  std::vector<SeriesRow> series{series_row(state)};
  std::vector<SolverState> snapshots{state};
  double last_series_log = std::log(std::max(state.peak_value, 1e-300));
  double last_snapshot_log = last_series_log;
  std::size_t remeshes = 0;
  Stepper stepper(config);
  std::vector<double> buffer;
  const double threshold = config.threshold();
  bool blew_up = false;
  std::string reason = "step budget exhausted";

  while (state.step_count < config.max_steps) {
    state = advance_with_retry(stepper, state, buffer);
    const double lp = std::log(std::max(state.peak_value, 1e-300));
    const bool done = state.peak_value >= threshold;
    if (done || lp - last_series_log >= config.series_log_step ||
        (config.series_log_step == 0.0)) {
      series.push_back(series_row(state));
      last_series_log = lp;
    }
    if (done || lp - last_snapshot_log >= config.snapshot_log_step ||
        (config.snapshot_every > 0 && state.step_count % config.snapshot_every == 0)) {
      snapshots.push_back(state);
      last_snapshot_log = std::max(lp, last_snapshot_log);
    }
    if (progress) progress(state);
    if (done) {
      blew_up = true;
      reason = "peak reached blow-up threshold";
      break;
    }

    const Grid& g = state.field.grid();
    if (state.peak_location > config.remesh_peak_fraction * g.y_max() ||
        boundary_magnitude(state.field, config.remesh_band) > config.truncation_threshold) {
      y_max = config.remesh_growth * g.y_max();
      RemeshOptions opts;
      opts.n = node_count(y_max);
      opts.stretch = config.grid_stretch;
      opts.threshold = config.truncation_threshold;
      const double t = state.t;
      const std::size_t steps = state.step_count;
      state = make_state(remesh(state.field, state.peak_location, y_max, opts), t, steps);
      ++remeshes;
    }
  }
  return RunResult{std::move(series), std::move(snapshots), std::move(state), blew_up, remeshes,
                   reason};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw FitError("line fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("line fit needs distinct abscissae");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return {my - slope * mx, slope, r2};
}

BlowupFit fit_blowup(std::span<const SeriesRow> series, const FitOptions& options) {
  if (series.size() < 4) throw FitError("series too short for a blow-up fit");
  double pmin = series.front().peak_value, pmax = pmin;
  for (const auto& r : series) {
    pmin = std::min(pmin, r.peak_value);
    pmax = std::max(pmax, r.peak_value);
  }
  if (!(pmin > 0.0) || std::log10(pmax / pmin) < options.min_decades) {
    std::ostringstream msg;
    msg << "series spans " << (pmin > 0.0 ? std::log10(pmax / pmin) : 0.0)
        << " decades of peak growth, need " << options.min_decades;
    throw FitError(msg.str());
  }
  const double p_end = series.back().peak_value;

  std::vector<double> t, inv;
  for (const auto& r : series) {
    if (r.peak_value >= p_end * std::pow(10.0, -options.t_decades)) {
      t.push_back(r.t);
      inv.push_back(1.0 / r.peak_value);
    }
  }
  const LineFit lin = fit_line(t, inv);
  if (!(lin.slope < 0.0)) throw FitError("1/peak does not decrease over the final decade");
  BlowupFit fit;
  fit.T_est = -lin.intercept / lin.slope;
  fit.r2_inverse = lin.r2;

  std::vector<double> lt, lp, ly;
  const double cut = p_end * std::pow(10.0, -options.fit_decades);
  for (const auto& r : series) {
    if (r.peak_value < cut || !(fit.T_est - r.t > 0.0) || !(r.peak_location > 0.0)) continue;
    if (fit.window_points == 0) fit.window_start = r.t;
    ++fit.window_points;
    lt.push_back(std::log(fit.T_est - r.t));
    lp.push_back(std::log(r.peak_value));
    ly.push_back(std::log(r.peak_location));
  }
  if (lt.size() < 3) throw FitError("too few points before the estimated blow-up time");
  const LineFit amp = fit_line(lt, lp);
  const LineFit loc = fit_line(lt, ly);
  fit.amp_exponent = amp.slope;
  fit.r2_amp = amp.r2;
  fit.peak_exponent = loc.slope;
  fit.r2_peak = loc.r2;
  return fit;
}

double half_width_half_max(const Field& field) {
  const std::size_t i = field.argmax();
  const double half = 0.5 * field[i];
  auto crossing = [&](std::size_t a, std::size_t b) {
    const double t = (half - field[a]) / (field[b] - field[a]);
    return field.node(a) + t * (field.node(b) - field.node(a));
  };
  std::size_t l = i;
  while (l > 0 && field[l - 1] > half) --l;
  std::size_t r = i;
  while (r + 1 < field.size() && field[r + 1] > half) ++r;
  if (l == 0 || r + 1 == field.size())
    throw FrameError("half maximum not reached inside the domain");
  return 0.5 * (crossing(r, r + 1) - crossing(l - 1, l));
}

RescaledProfile rescaled_snapshot(const SolverState& state, std::size_t points) {
  const Field& f = state.field;
  if (!(state.peak_value > 0.0)) throw FrameError("no positive peak to rescale");
  const double lambda = std::sqrt(state.peak_value);
  const double mu = 2.0 * half_width_half_max(f) / (lambda * kPi);
  const double y_star = state.peak_location;
  const double lo = y_star - lambda * mu * kPi;
  const double hi = y_star + lambda * mu * kPi;
  const double slack = 1e-2 * lambda * mu * kPi;
  if (lo < f.grid().front() - slack || hi > f.grid().back() + slack) {
    std::ostringstream msg;
    msg << "profile frame [" << lo << ", " << hi << "] leaves the domain [" << f.grid().front()
        << ", " << f.grid().back() << "]";
    throw FrameError(msg.str());
  }
  auto zgrid = uniform_grid(-kPi, kPi, points);
  std::vector<double> ys(points);
  for (std::size_t i = 0; i < points; ++i) ys[i] = y_star + lambda * mu * (*zgrid)[i];
  for (double& y : ys) y = std::clamp(y, f.grid().front(), f.grid().back());
  auto vals = interpolate_at(f, ys);
  for (double& v : vals) v /= lambda * lambda;
  return {Field(zgrid, std::move(vals)), lambda, mu, y_star};
}

double profile_deviation(const RescaledProfile& profile, double fraction) {
  double dev = 0.0;
  const Field& F = profile.profile;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double z = F.node(i);
    if (std::abs(z) > fraction * kPi + 1e-12) continue;
    const double c = std::cos(0.5 * z);
    dev = std::max(dev, std::abs(F[i] - c * c));
  }
  return dev;
}

RegularityReport compact_regularity_probe(std::span<const SolverState> snapshots,
                                          const RegularityOptions& options) {
  if (snapshots.empty()) throw ParameterError("regularity probe needs snapshots");
  RegularityReport rep;
  for (const auto& s : snapshots) {
    const Field d = derivative(s.field, 1);
    double sx = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < s.field.size() && s.field.node(i) <= options.y_window; ++i) {
      sx = std::max(sx, std::abs(s.field[i]));
      sd = std::max(sd, std::abs(d[i]));
    }
    rep.times.push_back(s.t);
    rep.sup_xi.push_back(sx);
    rep.sup_dxi.push_back(sd);
    rep.sup_norm = std::max(rep.sup_norm, std::max(sx, sd));
  }
  // Final decade of peak growth against everything before it.
  const double p_end = snapshots.back().peak_value;
  double before = 0.0, during = 0.0;
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const double w = std::max(rep.sup_xi[k], rep.sup_dxi[k]);
    if (snapshots[k].peak_value >= 0.1 * p_end) during = std::max(during, w);
    else before = std::max(before, w);
  }
  rep.final_decade_growth = before > 0.0 ? during / before : 1.0;

  const SolverState& last = snapshots.back();
  rep.fit_lo = options.fit_lo_fraction * last.peak_location;
  rep.fit_hi = options.fit_hi_fraction * last.peak_location;
  std::vector<double> lx, ly;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i < last.field.size(); ++i) {
    const double y = last.field.node(i);
    if (y < rep.fit_lo || y > rep.fit_hi) continue;
    const double v = last.field[i];
    num += v * y * y;
    den += y * y * y * y;
    if (v > 0.0) {
      lx.push_back(std::log(y));
      ly.push_back(std::log(v));
    }
  }
  if (lx.size() < 3) throw FitError("quadratic window holds fewer than three samples");
  rep.quadratic_coeff = num / den;
  rep.loglog_exponent = fit_line(lx, ly).slope;
  rep.mu_proxy = rep.quadratic_coeff > 0.0 ? 1.0 / (2.0 * std::sqrt(rep.quadratic_coeff)) : 0.0;
  return rep;
}

}  // namespace prandtl
