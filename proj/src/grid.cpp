#include "prandtl/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/stencil.hpp"

namespace prandtl {

Grid::Grid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < kMinNodes) {
    std::ostringstream msg;
    msg << "grid needs at least " << kMinNodes << " nodes, got " << nodes_.size();
    throw ParameterError(msg.str());
  }
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (!(nodes_[i + 1] > nodes_[i]) || !std::isfinite(nodes_[i])) {
      std::ostringstream msg;
      msg << "grid nodes not strictly increasing at index " << i;
      throw ParameterError(msg.str());
    }
  }
}

std::size_t Grid::locate(double x) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  std::ptrdiff_t i = (it - nodes_.begin()) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(nodes_.size()) - 2);
  return static_cast<std::size_t>(i);
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ParameterError("field without grid");
  if (values_.size() != grid_->size()) {
    std::ostringstream msg;
    msg << "field has " << values_.size() << " values for " << grid_->size() << " nodes";
    throw ParameterError(msg.str());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "non-finite field value at node " << i << " (y = " << (*grid_)[i] << ")";
      throw NumericalError(msg.str());
    }
  }
}

double Field::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

std::size_t Field::argmax() const {
  return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) -
                                  values_.begin());
}

namespace {

// Length covered by `a` cells whose sizes grow like r^x (continuous index).
double geometric_length(double r, double a) {
  if (a <= 0.0) return 0.0;
  const double lr = std::log(r);
  return std::expm1(a * lr) / lr;
}

}  // namespace

GridPtr build_grid(double y_max, std::size_t n, double stretch, double focus) {
  if (!(y_max > 0.0) || !std::isfinite(y_max)) throw ParameterError("y_max must be positive");
  if (n < Grid::kMinNodes) throw ParameterError("grid needs at least 8 nodes");
  if (!(stretch >= 1.0)) throw ParameterError("stretch must be >= 1");
  if (!(focus >= 0.0 && focus <= y_max)) throw ParameterError("focus outside [0, y_max]");

  const double m = static_cast<double>(n - 1);
  std::vector<double> nodes(n);
  if (stretch == 1.0) {
    for (std::size_t i = 0; i < n; ++i) nodes[i] = y_max * static_cast<double>(i) / m;
    nodes.back() = y_max;
    return std::make_shared<const Grid>(std::move(nodes));
  }

  const double r = stretch;
  if (!std::isfinite(geometric_length(r, m))) throw ParameterError("stretch too large for n");

  // Continuous index xf of the focus: left/right lengths are proportional to
  // geometric_length(xf) and geometric_length(m - xf).
  const double target = focus / y_max;
  auto frac = [&](double xf) {
    const double l = geometric_length(r, xf);
    const double rr = geometric_length(r, m - xf);
    return l / (l + rr);
  };
  double lo = 0.0, hi = m;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (frac(mid) < target) lo = mid; else hi = mid;
  }
  const double xf = 0.5 * (lo + hi);
  const double h0 = y_max / (geometric_length(r, xf) + geometric_length(r, m - xf));
  if (!(h0 > 0.0) || !std::isfinite(h0)) throw ParameterError("degenerate stretched grid");

  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    nodes[i] = x <= xf ? focus - h0 * geometric_length(r, xf - x)
                       : focus + h0 * geometric_length(r, x - xf);
  }
  nodes.front() = 0.0;
  nodes.back() = y_max;
  return std::make_shared<const Grid>(std::move(nodes));
}

GridPtr uniform_grid(double lo, double hi, std::size_t n) {
  if (!(hi > lo)) throw ParameterError("uniform_grid needs hi > lo");
  if (n < Grid::kMinNodes) throw ParameterError("grid needs at least 8 nodes");
  std::vector<double> nodes(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = lo + h * static_cast<double>(i);
  nodes.back() = hi;
  return std::make_shared<const Grid>(std::move(nodes));
}

Field derivative(const Field& field, int order) {
  if (order != 1 && order != 2) throw ParameterError("derivative order must be 1 or 2");
  const Grid& g = field.grid();
  const std::size_t n = g.size();
  auto x = g.nodes();
  auto v = field.values();
  std::vector<double> out(n);

  // One-sided stencils: 3 points for f', 4 points for f'' (both second order).
  const std::size_t width = order == 1 ? 3 : 4;
  {
    auto w = stencil_weights(x[0], x.subspan(0, width), order);
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) acc += w[j] * v[j];
    out[0] = acc;
  }
  {
    auto pts = x.subspan(n - width, width);
    auto w = stencil_weights(x[n - 1], pts, order);
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) acc += w[j] * v[n - width + j];
    out[n - 1] = acc;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = x[i] - x[i - 1];
    const double h2 = x[i + 1] - x[i];
    if (order == 1) {
      out[i] = -h2 / (h1 * (h1 + h2)) * v[i - 1] + (h2 - h1) / (h1 * h2) * v[i] +
               h1 / (h2 * (h1 + h2)) * v[i + 1];
    } else {
      out[i] = 2.0 * (v[i - 1] / (h1 * (h1 + h2)) - v[i] / (h1 * h2) +
                      v[i + 1] / (h2 * (h1 + h2)));
    }
  }
  return Field(field.grid_ptr(), std::move(out));
}

Field cumulative_integral(const Field& field) {
  auto x = field.grid().nodes();
  auto v = field.values();
  std::vector<double> out(v.size());
  out[0] = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (v[i] + v[i - 1]);
  return Field(field.grid_ptr(), std::move(out));
}

double integrate(const Field& field) {
  auto x = field.grid().nodes();
  auto v = field.values();
  double acc = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (v[i] + v[i - 1]);
  return acc;
}

namespace {

// Weights w_j with sum_j w_j y_j = integral over [a, b] of the parabola
// through (x_j, y_j), j = 0..2. Simpson's rule is exact on the parabola.
std::array<double, 3> parabola_weights(double x0, double x1, double x2, double a, double b) {
  auto lagrange = [&](int j, double t) {
    switch (j) {
      case 0: return (t - x1) * (t - x2) / ((x0 - x1) * (x0 - x2));
      case 1: return (t - x0) * (t - x2) / ((x1 - x0) * (x1 - x2));
      default: return (t - x0) * (t - x1) / ((x2 - x0) * (x2 - x1));
    }
  };
  const double m = 0.5 * (a + b);
  std::array<double, 3> w{};
  for (int j = 0; j < 3; ++j)
    w[j] = (b - a) / 6.0 * (lagrange(j, a) + 4.0 * lagrange(j, m) + lagrange(j, b));
  return w;
}

}  // namespace

double integrate_simpson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw ParameterError("integrate_simpson: size mismatch");
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
  double acc = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    auto w = parabola_weights(x[i], x[i + 1], x[i + 2], x[i], x[i + 2]);
    acc += w[0] * y[i] + w[1] * y[i + 1] + w[2] * y[i + 2];
  }
  if (i + 1 < n) {
    // Odd number of intervals: last cell from the parabola through the last
    // three nodes.
    auto w = parabola_weights(x[n - 3], x[n - 2], x[n - 1], x[n - 2], x[n - 1]);
    acc += w[0] * y[n - 3] + w[1] * y[n - 2] + w[2] * y[n - 1];
  }
  return acc;
}

double integrate_simpson(const Field& field) {
  return integrate_simpson(field.grid().nodes(), field.values());
}

namespace {

std::vector<double> monotone_slopes(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);

  // Fourth-order slope estimates from five-point Lagrange stencils.
  std::vector<double> d(n);
  const std::size_t width = std::min<std::size_t>(5, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t start = i >= 2 ? i - 2 : 0;
    start = std::min(start, n - width);
    auto w = stencil_weights(x[i], x.subspan(start, width), 1);
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) acc += w[j] * y[start + j];
    d[i] = acc;
  }

  // Hyman filter: keep slopes inside the Fritsch-Carlson box, zero at data
  // extrema.
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? secant[i - 1] : secant[0];
    const double right = i + 1 < n ? secant[i] : secant[n - 2];
    if (left * right <= 0.0) {
      d[i] = 0.0;
      continue;
    }
    const double sign = right > 0.0 ? 1.0 : -1.0;
    const double cap = 3.0 * std::min(std::abs(left), std::abs(right));
    d[i] = sign * std::min(std::max(0.0, sign * d[i]), cap);
  }
  return d;
}

std::vector<double> spline_second_derivatives(std::span<const double> x,
                                              std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0), c(n, 0.0), rhs(n, 0.0);
  // Natural spline: m[0] = m[n-1] = 0. Thomas algorithm on interior rows.
  std::vector<double> diag(n, 1.0), upper(n, 0.0), lower(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    lower[i] = h0 / 6.0;
    diag[i] = (h0 + h1) / 3.0;
    upper[i] = h1 / 6.0;
    rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
  return m;
}

}  // namespace

std::vector<double> interpolate_at(const Field& field, std::span<const double> points,
                                   Interpolation method) {
  const Grid& g = field.grid();
  auto x = g.nodes();
  auto y = field.values();
  const double tol = 1e-12 * std::max(1.0, std::abs(g.back() - g.front()));
  for (double p : points) {
    if (!(p >= g.front() - tol && p <= g.back() + tol)) {
      std::ostringstream msg;
      msg << "interpolation point " << p << " outside [" << g.front() << ", " << g.back() << "]";
      throw RangeError(msg.str());
    }
  }

  std::vector<double> out(points.size());
  switch (method) {
    case Interpolation::linear: {
      for (std::size_t k = 0; k < points.size(); ++k) {
        const std::size_t i = g.locate(points[k]);
        const double t = (points[k] - x[i]) / (x[i + 1] - x[i]);
        out[k] = (1.0 - t) * y[i] + t * y[i + 1];
      }
      break;
    }
    case Interpolation::monotone_cubic: {
      const auto d = monotone_slopes(x, y);
      for (std::size_t k = 0; k < points.size(); ++k) {
        const std::size_t i = g.locate(points[k]);
        const double h = x[i + 1] - x[i];
        const double t = (points[k] - x[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        out[k] = (2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * d[i] +
                 (-2 * t3 + 3 * t2) * y[i + 1] + (t3 - t2) * h * d[i + 1];
      }
      break;
    }
    case Interpolation::cubic_spline: {
      const auto m = spline_second_derivatives(x, y);
      for (std::size_t k = 0; k < points.size(); ++k) {
        const std::size_t i = g.locate(points[k]);
        const double h = x[i + 1] - x[i];
        const double a = (x[i + 1] - points[k]) / h;
        const double b = 1.0 - a;
        out[k] = a * y[i] + b * y[i + 1] +
                 ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
      }
      break;
    }
  }
  return out;
}

Field interpolate(const Field& field, const GridPtr& targets, Interpolation method) {
  if (*targets == field.grid()) return Field(targets, {field.values().begin(), field.values().end()});
  return Field(targets, interpolate_at(field, targets->nodes(), method));
}

double boundary_magnitude(const Field& field, double band) {
  const Grid& g = field.grid();
  const double start = g.back() - band * (g.back() - g.front());
  double mx = 0.0;
  for (std::size_t i = g.size(); i-- > 0;) {
    if (g[i] < start && i + 2 < g.size()) break;
    mx = std::max(mx, std::abs(field[i]));
  }
  return mx;
}

Field remesh(const Field& field, double new_focus, double new_y_max, const RemeshOptions& options) {
  const Grid& old = field.grid();
  if (!(new_y_max >= old.y_max())) throw ParameterError("remesh cannot shrink the domain");
  const double edge = boundary_magnitude(field, options.boundary_band);
  if (edge > options.threshold) {
    std::ostringstream msg;
    msg << "field is " << edge << " near the right boundary y = " << old.y_max()
        << " (threshold " << options.threshold << "); domain too small";
    throw DomainTruncationError(msg.str());
  }
  const std::size_t n = options.n == 0 ? old.size() : options.n;
  auto grid = build_grid(new_y_max, n, options.stretch, new_focus);
  if (*grid == old) return Field(grid, {field.values().begin(), field.values().end()});

  std::vector<double> inside;
  for (double y : grid->nodes())
    if (y <= old.y_max()) inside.push_back(y);
  auto vals = interpolate_at(field, inside, Interpolation::monotone_cubic);
  vals.resize(grid->size(), 0.0);
  return Field(grid, std::move(vals));
}

}  // namespace prandtl
