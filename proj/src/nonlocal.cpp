#include "prandtl/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prandtl/errors.hpp"
#include "prandtl/solver.hpp"

namespace prandtl {

namespace {

const KernelEvaluator kDefault{};

double direct_sum(const KernelEvaluator& ev, int i, int shift, double y) {
  // Terms y^{n+i} / (n! (n+shift)!) with i the power offset.
  double term = std::pow(y, i) / std::tgamma(shift + 1.0);
  double sum = term;
  for (int n = 0; n < ev.max_terms; ++n) {
    const double r = y / ((n + 1.0) * (n + 1.0 + shift));
    term *= r;
    sum += term;
    if (r < 1.0 && term / (1.0 - r) <= ev.tol * sum) return sum;
  }
  throw NumericalError("kernel series did not converge");
}

double log_sum(const KernelEvaluator& ev, int i, int shift, double y) {
  const double ly = std::log(y);
  auto log_term = [&](double n) {
    return (n + i) * ly - std::lgamma(n + 1.0) - std::lgamma(n + shift + 1.0);
  };
  // Terms peak near n = sqrt(y).
  const double peak_n = std::max(0.0, std::floor(std::sqrt(y) - 0.5 * shift));
  const double peak = log_term(peak_n);
  double acc = 0.0;
  for (double n = peak_n; n >= 0.0; n -= 1.0) {
    const double e = std::exp(log_term(n) - peak);
    acc += e;
    if (e <= ev.tol * acc * 1e-2) break;
  }
  for (double n = peak_n + 1.0;; n += 1.0) {
    if (n - peak_n > ev.max_terms) throw NumericalError("kernel series did not converge");
    const double e = std::exp(log_term(n) - peak);
    acc += e;
    const double r = y / ((n + 1.0) * (n + 1.0 + shift));
    if (r < 1.0 && e / (1.0 - r) <= ev.tol * acc) break;
  }
  return peak + std::log(acc);
}

}  // namespace

double KernelEvaluator::log_primitive(int i, double y) const {
  if (i < 0) throw ParameterError("primitive order must be non-negative");
  if (!(y > 0.0)) throw ParameterError("log_primitive needs y > 0");
  if (y <= log_space_from) return std::log(direct_sum(*this, i, i, y));
  return log_sum(*this, i, i, y);
}

double KernelEvaluator::primitive(int i, double y) const {
  if (i < 0) throw ParameterError("primitive order must be non-negative");
  if (std::isnan(y)) throw ParameterError("kernel argument is NaN");
  if (y < 0.0) return 0.0;
  if (y == 0.0) return i == 0 ? 1.0 : 0.0;
  if (y <= log_space_from) return direct_sum(*this, i, i, y);
  return std::exp(log_sum(*this, i, i, y));
}

double KernelEvaluator::derivative(double y) const {
  if (y < 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  if (y <= log_space_from) return direct_sum(*this, 0, 1, y);
  return std::exp(log_sum(*this, 0, 1, y));
}

double kernel(double y) { return kDefault(y); }
double kernel_primitive(int i, double y) { return kDefault.primitive(i, y); }
double kernel_derivative(double y) { return kDefault.derivative(y); }

double kernel_ode_check(double y) {
  if (!(y > 0.0)) throw ParameterError("kernel ODE check needs y > 0");
  return std::abs(y * kernel_derivative(y) - kernel_primitive(1, y));
}

Field green_solution(const Field& u0, double t, const GridPtr& x_grid) {
  if (!(t >= 0.0)) throw ParameterError("time must be non-negative");
  const Grid& g = u0.grid();
  if (g.front() != 0.0) throw ParameterError("datum must start at x = 0");
  const double tol = 1e-12 * std::max(1.0, g.back());
  std::vector<double> targets(x_grid->size());
  for (std::size_t m = 0; m < targets.size(); ++m) {
    const double x = (*x_grid)[m];
    if (x < -tol || x > g.back() + tol) throw RangeError("green_solution point outside the datum");
    targets[m] = std::clamp(x, 0.0, g.back());
  }
  // Integrated by parts: u = u0(x) + t int_0^x u0(y) k'(t (x - y)) dy.
  std::vector<double> out = interpolate_at(u0, targets);
  if (t == 0.0) return Field(x_grid, std::move(out));
  std::vector<double> xs, fs;
  for (std::size_t m = 0; m < out.size(); ++m) {
    const double x = targets[m];
    if (x <= tol) continue;
    xs.clear();
    fs.clear();
    for (std::size_t j = 0; j < g.size() && g[j] < x - tol; ++j) {
      xs.push_back(g[j]);
      fs.push_back(u0[j] * kernel_derivative(t * (x - g[j])));
    }
    if (xs.size() == 1) {
      const double mid[] = {0.5 * x};
      xs.push_back(mid[0]);
      fs.push_back(interpolate_at(u0, mid)[0] * kernel_derivative(t * mid[0]));
    }
    xs.push_back(x);
    fs.push_back(out[m] * kernel_derivative(0.0));
    out[m] += t * integrate_simpson(xs, fs);
  }
  return Field(x_grid, std::move(out));
}

NonlocalState direct_step_nonlocal(const NonlocalState& state, double dt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  const Field k1 = cumulative_integral(state.u);
  std::vector<double> mid(state.u.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = state.u[i] + 0.5 * dt * k1[i];
  const Field k2 = cumulative_integral(Field(state.u.grid_ptr(), std::move(mid)));
  std::vector<double> next(state.u.size());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] = state.u[i] + dt * k2[i];
  return {state.t + dt, Field(state.u.grid_ptr(), std::move(next))};
}

Field direct_solve_nonlocal(const Field& u0, double t_end, double dt) {
  if (!(t_end >= 0.0) || !(dt > 0.0)) throw ParameterError("invalid time span");
  const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  NonlocalState st{0.0, u0};
  for (long n = 0; n < steps; ++n) st = direct_step_nonlocal(st, t_end / steps);
  return st.u;
}

Field transported_solution(const Field& v0, double t) {
  if (!(t >= 0.0)) throw ParameterError("time must be non-negative");
  if (t == 0.0) return v0;
  const double shrink = std::exp(-t);
  std::vector<double> ys(v0.size());
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = v0.node(i) * shrink;
  const Field u = green_solution(v0, std::expm1(t), std::make_shared<const Grid>(std::move(ys)));
  return Field(v0.grid_ptr(), std::vector<double>(u.values().begin(), u.values().end()));
}

DecayFit compact_decay(const Field& v0, double L, std::span<const double> times) {
  if (times.size() < 2) throw ParameterError("decay fit needs at least two times");
  DecayFit fit;
  std::vector<double> logs;
  for (double t : times) {
    const Field v = transported_solution(v0, t);
    double sup = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v.node(i) <= L) sup = std::max(sup, std::abs(v[i]));
    fit.times.push_back(t);
    fit.sup_compact.push_back(sup);
    logs.push_back(std::log(std::max(sup, std::numeric_limits<double>::min())));
  }
  const LineFit line = fit_line(fit.times, logs);
  fit.slope = line.slope;
  fit.r2 = line.r2;
  return fit;
}

}  // namespace prandtl
