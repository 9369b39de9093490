#include "prandtl/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/profiles.hpp"
#include "prandtl/quadrature.hpp"
#include "prandtl/spectral.hpp"
#include "prandtl/stencil.hpp"

namespace prandtl {

namespace {

constexpr double kPi = std::numbers::pi;

GridPtr symmetric_grid(double lo, double hi, double spacing) {
  const auto n = std::max<std::size_t>(
      Grid::kMinNodes, static_cast<std::size_t>(std::ceil((hi - lo) / spacing - 1e-9)) + 1);
  return uniform_grid(lo, hi, n);
}

// Quadrature nodes and rho-weights over [lo, hi], panels split at breaks.
struct WeightedNodes {
  std::vector<double> Y;
  std::vector<double> w;  // quadrature weight times rho
};

WeightedNodes weighted_nodes(double lo, double hi, std::vector<double> breaks, double panel_width,
                             const GaussRule& rule) {
  std::vector<double> cuts{lo};
  for (double b : breaks)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  WeightedNodes out;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double len = cuts[c + 1] - cuts[c];
    if (len <= 0.0) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil(len / panel_width - 1e-9)));
    const double width = len / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = cuts[c] + width * (p + 0.5);
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double Y = mid + 0.5 * width * rule.nodes[j];
        out.Y.push_back(Y);
        out.w.push_back(0.5 * width * rule.weights[j] * rho(Y));
      }
    }
  }
  return out;
}

class OrthogonalityMap {
 public:
  OrthogonalityMap(const Field& f, const DecomposeOptions& opt)
      : f_(f), opt_(opt), rule_(gauss_legendre(opt.n_quad)) {}

  std::array<double, 3> operator()(double lambda, double c2, double shift) {
    const double lo = std::max(f_.grid().front() - shift, -opt_.Y_cut);
    const double hi = opt_.Y_cut;
    std::vector<double> breaks;
    if (c2 > 0.0) {
      const double edge = kPi / std::sqrt(c2);
      breaks = {-edge, edge};
    }
    const WeightedNodes q = weighted_nodes(lo, hi, breaks, opt_.panel_width, rule_);
    std::vector<double> pts(q.Y.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      pts[i] = std::clamp(q.Y[i] + shift, f_.grid().front(), f_.grid().back());
    const auto fv = interpolate_at(f_, pts, Interpolation::cubic_spline);
    std::array<double, 3> r{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double Y = q.Y[i];
      const double e = (fv[i] - scaled_g1(lambda, c2, Y)) * q.w[i];
      r[0] += e;
      r[1] += e * hermite(1, Y);
      r[2] += e * hermite(2, Y);
    }
    return r;
  }

 private:
  const Field& f_;
  const DecomposeOptions& opt_;
  GaussRule rule_;
};

double max_abs(const std::array<double, 3>& r) {
  return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

bool solve3(double J[3][3], std::array<double, 3> b, std::array<double, 3>& x) {
  double A[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) A[i][j] = J[i][j];
    A[i][3] = b[i];
  }
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    if (A[p][c] == 0.0) return false;
    if (p != c)
      for (int k = 0; k < 4; ++k) std::swap(A[p][k], A[c][k]);
    for (int r = c + 1; r < 3; ++r) {
      const double m = A[r][c] / A[c][c];
      for (int k = c; k < 4; ++k) A[r][k] -= m * A[c][k];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = A[r][3];
    for (int k = r + 1; k < 3; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

// Three-point derivative at index k of samples (x, y).
double stencil_derivative(std::span<const double> x, std::span<const double> y, std::size_t k) {
  const std::size_t n = x.size();
  std::size_t start = k == 0 ? 0 : k - 1;
  start = std::min(start, n - 3);
  const auto w = stencil_weights(x[k], x.subspan(start, 3), 1);
  return w[0] * y[start] + w[1] * y[start + 1] + w[2] * y[start + 2];
}

double g1_prime(double Z) { return std::abs(Z) <= kPi ? -0.5 * std::sin(Z) : 0.0; }

}  // namespace

double scaled_g1(double lambda, double c2, double Y) {
  const double l2 = lambda * lambda;
  if (c2 >= 0.0) {
    const double arg = std::sqrt(c2) * std::abs(Y);
    if (arg >= kPi) return 0.0;
    const double c = std::cos(0.5 * arg);
    return l2 * c * c;
  }
  return l2 * 0.5 * (1.0 + std::cosh(std::sqrt(-c2) * Y));
}

ParabolicFrame to_parabolic_frame(const Field& xi, double lambda, double y_star, double s,
                                  double Y_cut, double spacing) {
  if (!(lambda > 0.0)) throw ParameterError("frame scale lambda must be positive");
  if (!(Y_cut > 0.0) || !(spacing > 0.0)) throw ParameterError("invalid frame window");
  const Grid& g = xi.grid();
  const double lo = std::max(-lambda * (y_star - g.front()), -Y_cut);
  if (y_star + Y_cut / lambda > g.back() || !(lo < Y_cut)) {
    std::ostringstream msg;
    msg << "parabolic frame around y* = " << y_star << " with lambda = " << lambda
        << " leaves the domain [" << g.front() << ", " << g.back() << "]";
    throw FrameError(msg.str());
  }
  auto ygrid = symmetric_grid(lo, Y_cut, spacing);
  std::vector<double> ys(ygrid->size());
  for (std::size_t i = 0; i < ys.size(); ++i)
    ys[i] = std::clamp(y_star + (*ygrid)[i] / lambda, g.front(), g.back());
  auto v = interpolate_at(xi, ys, Interpolation::cubic_spline);
  for (double& x : v) x /= lambda * lambda;
  return {Field(ygrid, std::move(v)), lambda, y_star, s};
}

ProfileFrame to_profile_frame(const Field& xi, double lambda, double mu, double y_star,
                              const GridPtr& z_grid) {
  if (!(lambda > 0.0 && mu > 0.0)) throw ParameterError("frame parameters must be positive");
  const Grid& g = xi.grid();
  std::vector<double> ys(z_grid->size());
  const double tol = 1e-9 * std::max(1.0, g.back());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = y_star + lambda * mu * (*z_grid)[i];
    if (y < g.front() - tol || y > g.back() + tol) {
      std::ostringstream msg;
      msg << "profile frame point Z = " << (*z_grid)[i] << " maps to y = " << y
          << " outside the domain";
      throw FrameError(msg.str());
    }
    ys[i] = std::clamp(y, g.front(), g.back());
  }
  auto F = interpolate_at(xi, ys);
  std::vector<double> u(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) {
    F[i] /= lambda * lambda;
    u[i] = F[i] - g1_exact((*z_grid)[i]);
  }
  return {Field(z_grid, std::move(F)), Field(z_grid, std::move(u)), lambda, mu, y_star};
}

DecomposeResult decompose(const Field& f, const DecomposeGuess& guess,
                          const DecomposeOptions& options) {
  if (!(guess.lambda > 0.0 && guess.mu > 0.0))
    throw ParameterError("decomposition guess must have positive lambda and mu");
  OrthogonalityMap R(f, options);
  double x[3] = {guess.lambda, 1.0 / std::pow(guess.lambda * guess.lambda * guess.mu, 2),
                 guess.shift};
  auto eval = [&](const double* p) { return R(p[0], p[1], p[2]); };
  std::array<double, 3> r = eval(x);
  double norm = max_abs(r);
  int it = 0;
  for (; it < options.max_iterations && !(norm <= options.tolerance); ++it) {
    double J[3][3];
    for (int j = 0; j < 3; ++j) {
      double scale = 1.0;
      if (j == 0) scale = std::max(std::abs(x[0]), 1e-3);
      if (j == 1) scale = std::max(std::abs(x[1]), 1e-2);
      const double h = options.fd_step * scale;
      double xp[3] = {x[0], x[1], x[2]};
      xp[j] += h;
      const auto rp = eval(xp);
      for (int i = 0; i < 3; ++i) J[i][j] = (rp[i] - r[i]) / h;
    }
    std::array<double, 3> dx{};
    std::array<double, 3> neg{-r[0], -r[1], -r[2]};
    if (!solve3(J, neg, dx)) break;
    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half, step *= 0.5) {
      double xt[3] = {x[0] + step * dx[0], x[1] + step * dx[1], x[2] + step * dx[2]};
      if (!(xt[0] > 0.0)) continue;
      const auto rt = eval(xt);
      const double nt = max_abs(rt);
      if (std::isfinite(nt) && nt < norm) {
        std::copy(xt, xt + 3, x);
        r = rt;
        norm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(norm <= options.tolerance) || !(x[1] > 0.0)) {
    std::ostringstream msg;
    msg << "decomposition did not converge after " << it << " Newton iterations (residual "
        << norm << ", lambda " << x[0] << ", c^2 " << x[1] << ", shift " << x[2] << ")";
    throw DecompositionError(msg.str());
  }
  const double lambda = x[0];
  const double mu = 1.0 / (lambda * lambda * std::sqrt(x[1]));
  std::vector<double> pts(f.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i] = std::clamp(f.node(i) + x[2], f.grid().front(), f.grid().back());
  auto fv = interpolate_at(f, pts, Interpolation::cubic_spline);
  for (std::size_t i = 0; i < fv.size(); ++i) fv[i] -= scaled_g1(lambda, x[1], f.node(i));
  return {lambda, mu, x[2], x[1], norm, it, r, Field(f.grid_ptr(), std::move(fv))};
}

ModulationState extract_state(const SolverState& snapshot, double s,
                              const DecomposeOptions& options) {
  const Field& xi = snapshot.field;
  double lambda = std::sqrt(snapshot.peak_value);
  double y_star = snapshot.peak_location;
  double mu = 2.0 * half_width_half_max(xi) / (lambda * kPi);
  double residual = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const ParabolicFrame frame = to_parabolic_frame(xi, lambda, y_star, s, options.Y_cut);
    const DecomposeGuess guess{1.0, lambda * lambda * mu, 0.0};
    const DecomposeResult d = decompose(frame.f, guess, options);
    const double new_lambda = lambda * d.lambda;
    y_star += d.shift / lambda;
    mu = d.lambda * d.mu / (lambda * lambda);
    lambda = new_lambda;
    residual = d.residual;
  }
  const double a = y_star / (lambda * mu) - kPi;
  return {s, snapshot.t, lambda, mu, a, y_star, residual};
}

double lambda_squared_integral(double t0, double lambda0, double t1, double lambda1) {
  const double p0 = lambda0 * lambda0, p1 = lambda1 * lambda1;
  const double dt = t1 - t0;
  const double dinv = 1.0 / p0 - 1.0 / p1;
  if (std::abs(dinv) <= 1e-12 * (1.0 / p0)) return dt * 0.5 * (p0 + p1);
  return dt * std::log(p1 / p0) / dinv;
}

std::vector<ModulationState> track(std::span<const SolverState> snapshots,
                                   const TrackOptions& options) {
  std::vector<ModulationState> out;
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const SolverState& snap = snapshots[k];
    if (k > 0 && !(snap.t > snapshots[k - 1].t))
      throw ParameterError("snapshots must be strictly ordered in t");
    ModulationState st;
    try {
      st = extract_state(snap, 0.0, options.decompose);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "at t = " << snap.t << ": " << e.what();
      throw DecompositionError(msg.str());
    }
    if (k == 0) {
      st.s = options.s0 != 0.0 ? options.s0 : 2.0 * std::log(st.lambda);
    } else {
      const ModulationState& prev = out.back();
      st.s = prev.s + lambda_squared_integral(prev.t, prev.lambda, st.t, st.lambda);
    }
    out.push_back(st);
  }
  return out;
}

std::vector<ModulationResidual> modulation_residuals(std::span<const ModulationState> states) {
  const std::size_t n = states.size();
  if (n < 3) throw ParameterError("modulation residuals need at least three states");
  std::vector<double> s(n), ll(n), lm(n);
  for (std::size_t k = 0; k < n; ++k) {
    s[k] = states[k].s;
    ll[k] = std::log(states[k].lambda);
    lm[k] = std::log(states[k].mu);
    if (k > 0 && !(s[k] > s[k - 1])) throw ParameterError("s must be strictly increasing");
  }
  std::vector<ModulationResidual> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double l4m2 = std::pow(states[k].lambda, 4) * states[k].mu * states[k].mu;
    out[k].s = s[k];
    out[k].r_lambda = stencil_derivative(s, ll, k) - 0.5 + 1.0 / (4.0 * l4m2);
    out[k].r_mu = stencil_derivative(s, lm, k) - 1.0 / (2.0 * l4m2);
  }
  return out;
}

ThirdsDecay r_mu_decay(std::span<const ModulationResidual> residuals) {
  if (residuals.size() < 3) throw ParameterError("need at least three residuals");
  const double s0 = residuals.front().s, s1 = residuals.back().s;
  const double cut1 = s0 + (s1 - s0) / 3.0, cut2 = s0 + 2.0 * (s1 - s0) / 3.0;
  double a = 0.0, b = 0.0;
  int na = 0, nb = 0;
  for (const auto& r : residuals) {
    if (r.s <= cut1) {
      a += std::abs(r.r_mu);
      ++na;
    } else if (r.s >= cut2) {
      b += std::abs(r.r_mu);
      ++nb;
    }
  }
  if (na == 0 || nb == 0) throw ParameterError("thirds of the window are empty");
  a /= na;
  b /= nb;
  return {a, b, b > 0.0 ? a / b : std::numeric_limits<double>::infinity()};
}

double shape_q(double Z) {
  const double z = std::abs(Z);
  return z >= kPi ? 1.0 : std::sin(0.5 * z);
}

double weight_w(double s, double Z) {
  if (!(s >= std::numbers::e)) throw ParameterError("weight needs s >= e");
  if (Z == 0.0) throw RangeError("weight w is singular at Z = 0");
  const double z = std::abs(Z);
  if (z >= kPi) return 1.0 / s;
  // (1+cos Z)/((1-cos Z) sin^4 Z |sin Z|) 4(pi-|Z|)^3 in half-angle form.
  const double sh = std::sin(0.5 * z);
  const double ch = std::sin(0.5 * (kPi - z));
  const double base = std::pow(kPi - z, 3) / (8.0 * std::pow(sh, 7) * ch * ch * ch);
  return base * std::pow(s, -shape_q(z));
}

double weight_w_ds(double s, double Z) { return -shape_q(Z) / s * weight_w(s, Z); }

double vector_A(double Z) {
  if (Z <= -0.5 * kPi) return -1.0;
  if (Z >= 0.5 * kPi) return 1.0;
  return std::sin(Z);
}

double transport_T(double Z) {
  if (Z <= -kPi) return -0.5 * (Z + kPi);
  if (Z >= kPi) return -0.5 * (Z - kPi);
  return 0.5 * std::sin(Z);
}

double potential_V(double Z) { return std::abs(Z) <= kPi ? -std::cos(Z) : 1.0; }

double phi_beta(double beta, double Z) {
  if (Z == 0.0 || std::abs(Z) == kPi) throw RangeError("phi_beta is evaluated off 0 and +-pi");
  if (std::abs(Z) < kPi) {
    const double t = std::tan(0.5 * Z);
    const double s = std::sin(Z);
    return std::pow(t * t, beta) * s * s;
  }
  return std::pow(std::abs(Z) - kPi, 2.0 * (1.0 - beta));
}

double phi_beta_derivative(double beta, double Z) {
  if (Z == 0.0 || std::abs(Z) == kPi) throw RangeError("phi_beta is evaluated off 0 and +-pi");
  if (std::abs(Z) < kPi) return 2.0 * phi_beta(beta, Z) * (beta + std::cos(Z)) / std::sin(Z);
  const double d = std::abs(Z) - kPi;
  const double sign = Z > 0.0 ? 1.0 : -1.0;
  return sign * 2.0 * (1.0 - beta) * std::pow(d, 1.0 - 2.0 * beta);
}

double local_operator_checks(double beta, double Z) {
  const double phi = phi_beta(beta, Z);
  return std::abs(potential_V(Z) * phi + transport_T(Z) * phi_beta_derivative(beta, Z) -
                  beta * phi);
}

Field apply_H(const Field& u) {
  const Grid& g = u.grid();
  if (!(g.front() <= 0.0 && g.back() >= 0.0)) throw ParameterError("Z grid must contain 0");
  const Field du = derivative(u, 1);
  const Field prim = cumulative_integral(u);
  const double zero[] = {0.0};
  const double offset = interpolate_at(prim, zero, Interpolation::linear)[0];
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double Z = u.node(i);
    out[i] = transport_T(Z) * du[i] + potential_V(Z) * u[i] + (prim[i] - offset) * g1_prime(Z);
  }
  return Field(u.grid_ptr(), std::move(out));
}

ExteriorNorms exterior_norms(const Field& u, double s, double a, double M) {
  if (!(M > 0.0)) throw ParameterError("M must be positive");
  const double cut = M * std::exp(-s);
  const Field du = derivative(u, 1);
  std::vector<double> xl, l2l, h1l, xr, l2r, h1r;
  const double left_end = -kPi - a;
  const double tol = 1e-12;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double Z = u.node(i);
    if (Z == 0.0) continue;
    const bool left = Z >= left_end - tol && Z <= -cut + tol;
    const bool right = Z >= cut - tol;
    if (!left && !right) continue;
    const double w = weight_w(s, Z);
    const double Au = vector_A(Z) * du[i];
    if (left) {
      xl.push_back(Z);
      l2l.push_back(u[i] * u[i] * w);
      h1l.push_back(Au * Au * w);
    } else {
      xr.push_back(Z);
      l2r.push_back(u[i] * u[i] * w);
      h1r.push_back(Au * Au * w);
    }
  }
  return {integrate_simpson(xl, l2l), integrate_simpson(xr, l2r), integrate_simpson(xl, h1l),
          integrate_simpson(xr, h1r)};
}

GridPtr exterior_grid(double s, double a, double M, double z_max, double ratio,
                      double outer_spacing) {
  if (!(ratio > 1.0) || !(outer_spacing > 0.0)) throw ParameterError("invalid exterior grid");
  const double cut = M * std::exp(-s);
  if (!(cut < kPi)) throw ParameterError("cut-off M e^{-s} must be below pi");
  // Geometric magnitudes from cut/10 to pi, hitting cut and pi exactly.
  std::vector<double> mags;
  const int inner = static_cast<int>(std::ceil(std::log(10.0) / std::log(ratio)));
  for (int j = inner; j >= 1; --j) mags.push_back(cut * std::pow(ratio, -j));
  const int outer = std::max(1, static_cast<int>(std::ceil(std::log(kPi / cut) / std::log(ratio))));
  const double r = std::pow(kPi / cut, 1.0 / outer);
  for (int j = 0; j < outer; ++j) mags.push_back(cut * std::pow(r, j));
  mags.push_back(kPi);

  auto extend = [&](double end) {
    std::vector<double> m;
    for (double x : mags)
      if (x < end - 1e-12) m.push_back(x);
    if (end > kPi) {
      const auto n = static_cast<std::size_t>(std::ceil((end - kPi) / outer_spacing));
      for (std::size_t j = 0; j < n; ++j) {
        const double x = kPi + (end - kPi) * static_cast<double>(j) / static_cast<double>(n);
        if (x > m.back() + 1e-12) m.push_back(x);
      }
    }
    m.push_back(end);
    return m;
  };
  const auto left = extend(kPi + a);
  const auto right = extend(z_max);
  std::vector<double> nodes;
  for (auto it = left.rbegin(); it != left.rend(); ++it) nodes.push_back(-*it);
  for (double x : right) nodes.push_back(x);
  return std::make_shared<const Grid>(std::move(nodes));
}

ExteriorNorms snapshot_exterior_norms(const SolverState& snapshot, const ModulationState& state,
                                      double M) {
  const Grid& g = snapshot.field.grid();
  const double scale = state.lambda * state.mu;
  const double z_max = (g.back() - state.y_star) / scale;
  auto zgrid = exterior_grid(state.s, state.a, M, z_max);
  const ProfileFrame frame = to_profile_frame(snapshot.field, state.lambda, state.mu,
                                              state.y_star, zgrid);
  return exterior_norms(frame.u, state.s, state.a, M);
}

FrameResidual frame_residual(std::span<const SolverState> slices,
                             std::span<const ModulationState> states,
                             const FrameResidualOptions& options) {
  if (slices.size() != 3 || states.size() != 3)
    throw ParameterError("frame residual needs exactly three slices and states");
  const double W = options.window;
  auto ygrid = symmetric_grid(-W, W, options.spacing);
  std::array<std::vector<double>, 3> f;
  for (int j = 0; j < 3; ++j) {
    const auto& st = states[j];
    const Grid& g = slices[j].field.grid();
    std::vector<double> ys(ygrid->size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double y = st.y_star + (*ygrid)[i] / st.lambda;
      if (y < g.front() || y > g.back()) throw FrameError("frame residual window leaves the domain");
      ys[i] = y;
    }
    f[j] = interpolate_at(slices[j].field, ys, Interpolation::cubic_spline);
    for (double& v : f[j]) v /= st.lambda * st.lambda;
  }
  const double s[3] = {states[0].s, states[1].s, states[2].s};
  const auto w = stencil_weights(s[1], s, 1);
  const double ls = options.lambda_s_scale *
                    (w[0] * std::log(states[0].lambda) + w[1] * std::log(states[1].lambda) +
                     w[2] * std::log(states[2].lambda));
  const double ys_s = w[0] * states[0].y_star + w[1] * states[1].y_star + w[2] * states[2].y_star;
  const ModulationState& mid = states[1];

  const Field fm(ygrid, f[1]);
  const Field fY = derivative(fm, 1);
  const Field fYY = derivative(fm, 2);
  const Field prim = cumulative_integral(fm);
  const double zero[] = {0.0};
  const double offset = interpolate_at(prim, zero, Interpolation::linear)[0];

  // int_{-lambda y*}^0 f dY = (1/lambda) int_0^{y*} xi dy.
  const Field mass = cumulative_integral(slices[1].field);
  const double ystar[] = {mid.y_star};
  const double head = interpolate_at(mass, ystar, Interpolation::linear)[0] / mid.lambda;
  const double drift = mid.lambda * ys_s;

  double sup = 0.0;
  double terms[7] = {0, 0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < fm.size(); ++i) {
    const double Y = fm.node(i);
    const double t_s = w[0] * f[0][i] + w[1] * f[1][i] + w[2] * f[2][i];
    const double t_scale = ls * (2.0 * fm[i] + Y * fY[i]);
    const double t_sq = -fm[i] * fm[i];
    const double t_nl = (prim[i] - offset) * fY[i];
    const double t_head = head * fY[i];
    const double t_drift = -drift * fY[i];
    const double t_visc = -fYY[i];
    const double r = t_s + t_scale + t_sq + t_nl + t_head + t_drift + t_visc;
    sup = std::max(sup, std::abs(r));
    const double all[7] = {t_s, t_scale, t_sq, t_nl, t_head, t_drift, t_visc};
    for (int k = 0; k < 7; ++k) terms[k] = std::max(terms[k], std::abs(all[k]));
  }
  const double largest = *std::max_element(terms, terms + 7);
  return {largest > 0.0 ? sup / largest : 0.0, sup, largest};
}

TrappedCheck trapped_check(const ModulationState& st, const ExteriorNorms& n,
                           const TrappedOptions& o) {
  TrappedCheck c;
  c.s = st.s;
  const double es = std::exp(0.5 * st.s);
  c.lambda_ok = st.lambda > es / o.K && st.lambda < o.K * es;
  c.mu_ok = st.mu > 1.0 / o.K && st.mu < o.K;
  c.a_ok = std::abs(st.a) < o.K * std::exp(-(0.5 - 2.0 * o.nu) * st.s);
  const double l2 = n.left_l2 + n.right_l2;
  const double h1 = n.left_h1 + n.right_h1;
  c.l2_ok = l2 < o.K * o.K * std::exp(-2.0 * (0.5 - o.nu) * st.s);
  c.h1_ok = h1 < o.K * o.K * std::exp(2.0 * o.nu * st.s);
  c.scaled_l2 = std::exp((1.0 - 2.0 * o.nu) * st.s) * l2;
  return c;
}

}  // namespace prandtl
