#include "prandtl/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "prandtl/errors.hpp"

namespace prandtl {

namespace {

const double kSqrt3 = std::sqrt(3.0);

void check_index(int i, int max_index) {
  if (i < 0 || i > max_index) {
    std::ostringstream msg;
    msg << "Hermite index " << i << " outside [0, " << max_index << "]";
    throw ParameterError(msg.str());
  }
}

}  // namespace

double rho(double Y) { return 0.5 * std::sqrt(3.0 / std::numbers::pi) * std::exp(-0.75 * Y * Y); }

double hermite(int i, double Y) {
  check_index(i, HermiteFrame::kMaxIndex);
  // sum_j i!/(j!(i-2j)!) (sqrt(3) Y)^{i-2j} (-1)^j, coefficients built
  // incrementally from the leading term.
  const double z = kSqrt3 * Y;
  double coeff = 1.0;  // i!/(j!(i-2j)!) at j = 0
  double sum = 0.0;
  for (int j = 0; 2 * j <= i; ++j) {
    if (j > 0) coeff *= static_cast<double>((i - 2 * j + 2) * (i - 2 * j + 1)) / j;
    const double term = coeff * std::pow(z, i - 2 * j);
    sum += (j % 2 == 0) ? term : -term;
  }
  return sum;
}

double hermite_derivative(int i, double Y) {
  check_index(i, HermiteFrame::kMaxIndex);
  if (i == 0) return 0.0;
  return kSqrt3 * i * hermite(i - 1, Y);
}

double hermite_norm2(int i) {
  check_index(i, HermiteFrame::kMaxIndex);
  double v = 1.0;
  for (int j = 1; j <= i; ++j) v *= 2.0 * j;
  return v;
}

double eigenvalue(int i) { return -1.0 + 1.5 * i; }

HermiteFrame::HermiteFrame(double Y0, double Y_cut, double panel_width, int n_quad, int max_index)
    : Y0_(Y0), Y_cut_(Y_cut), panel_width_(panel_width), n_quad_(n_quad), max_index_(max_index) {
  if (!(Y_cut > 0.0)) throw ParameterError("Y_cut must be positive");
  if (!(Y0 < Y_cut)) throw ParameterError("Y0 must be below Y_cut");
  if (!(panel_width > 0.0)) throw ParameterError("panel width must be positive");
  if (n_quad < 2) throw ParameterError("n_quad must be >= 2");
  check_index(max_index, kMaxIndex);
  rule_ = gauss_legendre(n_quad);
}

double HermiteFrame::lower() const { return std::max(Y0_, -Y_cut_); }

double HermiteFrame::integrate(const std::function<double(double)>& f,
                               std::span<const double> breaks) const {
  std::vector<double> cuts{lower()};
  for (double b : breaks)
    if (b > lower() && b < Y_cut_) cuts.push_back(b);
  cuts.push_back(Y_cut_);
  std::sort(cuts.begin(), cuts.end());
  auto weighted = [&f](double Y) { return f(Y) * rho(Y); };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len <= 0.0) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil(len / panel_width_ - 1e-9)));
    acc += integrate_panels(weighted, cuts[i], cuts[i + 1], panels, rule_);
  }
  return acc;
}

double HermiteFrame::inner(const std::function<double(double)>& f,
                           const std::function<double(double)>& g,
                           std::span<const double> breaks) const {
  return integrate([&](double Y) { return f(Y) * g(Y); }, breaks);
}

double HermiteFrame::basis(int i, double Y) const {
  check_index(i, max_index_);
  return hermite(i, Y);
}

double inner_product_rho(const Field& f, const Field& g, double Y0, double Y_cut) {
  if (!(f.grid() == g.grid())) throw ParameterError("inner product of fields on different grids");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double Y = f.node(i);
    if (Y < Y0 || Y > Y_cut) continue;
    x.push_back(Y);
    y.push_back(f[i] * g[i] * rho(Y));
  }
  return integrate_simpson(x, y);
}

Field apply_L(const Field& eps) {
  const Field d1 = derivative(eps, 1);
  const Field d2 = derivative(eps, 2);
  std::vector<double> out(eps.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = -eps[i] + 1.5 * eps.node(i) * d1[i] - d2[i];
  return Field(eps.grid_ptr(), std::move(out));
}

std::vector<double> low_mode_components(const Field& eps, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const Field h = sample(eps.grid_ptr(), [i](double Y) { return hermite(i, Y); });
    out.push_back(inner_product_rho(eps, h));
  }
  return out;
}

Field project_off_low_modes(const Field& eps) {
  std::array<Field, 3> h{sample(eps.grid_ptr(), [](double Y) { return hermite(0, Y); }),
                         sample(eps.grid_ptr(), [](double Y) { return hermite(1, Y); }),
                         sample(eps.grid_ptr(), [](double Y) { return hermite(2, Y); })};
  double gram[3][3], rhs[3];
  for (int i = 0; i < 3; ++i) {
    rhs[i] = inner_product_rho(eps, h[i]);
    for (int j = 0; j < 3; ++j) gram[i][j] = inner_product_rho(h[i], h[j]);
  }
  // Gaussian elimination with partial pivoting on the 3x3 Gram system.
  int perm[3] = {0, 1, 2};
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(gram[r][c]) > std::abs(gram[p][c])) p = r;
    if (p != c) {
      std::swap(gram[p], gram[c]);
      std::swap(rhs[p], rhs[c]);
      std::swap(perm[p], perm[c]);
    }
    if (gram[c][c] == 0.0) throw NumericalError("singular Gram matrix in projection");
    for (int r = c + 1; r < 3; ++r) {
      const double m = gram[r][c] / gram[c][c];
      for (int k = c; k < 3; ++k) gram[r][k] -= m * gram[c][k];
      rhs[r] -= m * rhs[c];
    }
  }
  double coeff[3];
  for (int r = 2; r >= 0; --r) {
    double s = rhs[r];
    for (int k = r + 1; k < 3; ++k) s -= gram[r][k] * coeff[k];
    coeff[r] = s / gram[r][r];
  }
  std::vector<double> out(eps.values().begin(), eps.values().end());
  for (std::size_t n = 0; n < out.size(); ++n)
    for (int i = 0; i < 3; ++i) out[n] -= coeff[i] * h[i][n];
  return Field(eps.grid_ptr(), std::move(out));
}

InequalitySides poincare_check(const Field& eps) {
  const Field d = derivative(eps, 1);
  auto gauss = [](double Y) { return std::exp(-0.25 * Y * Y); };
  std::vector<double> x(eps.values().size()), a(x.size()), b(x.size()), c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double Y = eps.node(i);
    const double w = gauss(Y);
    x[i] = Y;
    a[i] = Y * Y * eps[i] * eps[i] * w;
    b[i] = eps[i] * eps[i] * w;
    c[i] = d[i] * d[i] * w;
  }
  const double reflect = eps.grid().front() >= 0.0 ? 2.0 : 1.0;
  const double lhs = reflect * integrate_simpson(x, a);
  const double rhs = reflect * (4.0 * integrate_simpson(x, b) + 16.0 * integrate_simpson(x, c));
  return {lhs, rhs};
}

GapSides spectral_gap_check(const Field& eps_bar) {
  const Field d = derivative(eps_bar, 1);
  const double inf = std::numeric_limits<double>::infinity();
  const double grad = inner_product_rho(d, d, -inf, inf);
  const double mass = inner_product_rho(eps_bar, eps_bar, -inf, inf);
  return {grad, 4.5 * mass};
}

double eigen_residual(int i, double half_width, double spacing) {
  const auto n = static_cast<std::size_t>(std::llround(2.0 * half_width / spacing)) + 1;
  auto grid = uniform_grid(-half_width, half_width, n);
  const Field h = sample(grid, [i](double Y) { return hermite(i, Y); });
  const Field Lh = apply_L(h);
  std::vector<double> r(h.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = Lh[k] - eigenvalue(i) * h[k];
  const Field res(grid, std::move(r));
  const double inf = std::numeric_limits<double>::infinity();
  return std::sqrt(inner_product_rho(res, res, -inf, inf) / inner_product_rho(h, h, -inf, inf));
}

}  // namespace prandtl
