#include "prandtl/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "prandtl/errors.hpp"
#include "prandtl/quadrature.hpp"
#include "prandtl/solver.hpp"

namespace prandtl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadTol = 1e-15;

void check_k(int k) {
  if (k < 1) throw ParameterError("profile order k must be >= 1");
}

// Z(u) = int_0^u 2k/(1+v^{2k}) dv for 0 <= u <= 1, optionally from a known
// anchor value Z(u0).
double z_of_u(int k, double u, double u0 = 0.0, double z0 = 0.0) {
  if (u <= 0.0) return 0.0;
  const double p = 2.0 * k;
  return z0 + integrate_adaptive([p](double v) { return p / (1.0 + std::pow(v, p)); }, u0, u,
                                 kQuadTol, kQuadTol)
                  .value;
}

// a_k - Z(1/w) = int_0^w 2k s^{2k-2}/(1+s^{2k}) ds for 0 <= w <= 1.
double tail_of_w(int k, double w, double w0 = 0.0, double t0 = 0.0) {
  if (w <= 0.0) return 0.0;
  const double p = 2.0 * k;
  return t0 + integrate_adaptive(
                  [p](double s) { return p * std::pow(s, p - 2.0) / (1.0 + std::pow(s, p)); }, w0,
                  w, kQuadTol, kQuadTol)
                  .value;
}

// Safeguarded Newton for g(x) = target on [lo, hi], g increasing.
template <class G, class D>
double invert(G g, D dg, double target, double guess, double lo, double hi) {
  double x = std::clamp(guess, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double r = g(x) - target;
    if (r > 0.0) hi = x; else lo = x;
    const double d = dg(x);
    double next = d > 0.0 ? x - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x)) || hi - lo < 1e-300) return next;
    x = next;
  }
  throw NumericalError("profile parameter inversion did not converge");
}

// Parameter of the profile at 0 <= Z < a_k: u on the central branch, w = 1/u
// on the tail branch.
struct Param {
  bool tail;
  double p;
};

struct Branches {
  int k;
  double a;
  double z_mid;  // Z(1)

  // The anchor (x0, g0) is a parameter value with its known image.
  Param solve(double Z, double guess, double x0 = 0.0, double g0 = 0.0) const {
    const double p = 2.0 * k;
    if (Z <= z_mid) {
      auto g = [&](double u) { return z_of_u(k, u, x0, g0); };
      auto dg = [p](double u) { return p / (1.0 + std::pow(u, p)); };
      if (guess < 0.0) guess = Z / p;
      return {false, invert(g, dg, Z, guess, 0.0, 1.0)};
    }
    const double d = a - Z;
    auto g = [&](double w) { return tail_of_w(k, w, x0, g0); };
    auto dg = [p](double w) { return p * std::pow(w, p - 2.0) / (1.0 + std::pow(w, p)); };
    if (guess < 0.0) guess = std::pow((p - 1.0) * d / p, 1.0 / (p - 1.0));
    return {true, invert(g, dg, d, guess, 0.0, 1.0)};
  }
};

double g_of(int k, Param q) {
  const double p = 2.0 * k;
  if (!q.tail) return 1.0 / (1.0 + std::pow(q.p, p));
  const double wp = std::pow(q.p, p);
  return wp / (1.0 + wp);
}

double dg_of(int k, Param q) {
  const double p = 2.0 * k;
  if (!q.tail) return -std::pow(q.p, p - 1.0) / (1.0 + std::pow(q.p, p));
  return -q.p / (1.0 + std::pow(q.p, p));
}

double deficit_of(int k, Param q) {
  const double p = 2.0 * k;
  if (!q.tail) {
    const double up = std::pow(q.p, p);
    return up / (1.0 + up);
  }
  return 1.0 / (1.0 + std::pow(q.p, p));
}

Param table_param(const ProfileTable& t, double z) {
  const Branches b{t.k, t.a_k, t.z_mid};
  // Guess and integration anchor from the neighbouring sample.
  double guess = -1.0, x0 = 0.0, g0 = 0.0;
  const auto& Z = t.Z_samples;
  auto it = std::upper_bound(Z.begin(), Z.end(), z);
  if (it != Z.begin()) {
    const std::size_t i = static_cast<std::size_t>(it - Z.begin()) - 1;
    const double u = t.u_samples[i];
    const bool tail = z > b.z_mid;
    if (tail == (u > 1.0)) {
      guess = tail ? 1.0 / u : u;
      x0 = guess;
      g0 = tail ? t.a_k - Z[i] : Z[i];
    }
  }
  return b.solve(z, guess, x0, g0);
}

}  // namespace

double g1_exact(double Z) {
  if (std::abs(Z) > kPi) return 0.0;
  const double c = std::cos(0.5 * Z);
  return c * c;
}

double support_half_width(int k) {
  check_k(k);
  if (k == 1) return kPi;
  return kPi / std::sin(kPi / (2.0 * k));
}

double support_half_width_statement(int k) {
  check_k(k);
  return kPi / (2.0 * k * std::sin(kPi / (2.0 * k)));
}

double center_coeff_statement(int k) {
  check_k(k);
  return 1.0;
}

double edge_coeff_statement(int k) {
  check_k(k);
  return std::pow(2.0 * k - 1.0, 1.0 + 1.0 / (2.0 * k - 1.0));
}

ProfileTable build_profile(int k, std::size_t n, double tol) {
  check_k(k);
  if (n < 64) throw ParameterError("profile table needs at least 64 points");
  if (!(tol > 0.0)) throw ParameterError("profile tolerance must be positive");
  const double p = 2.0 * k;
  ProfileTable t;
  t.k = k;
  t.a_k = support_half_width(k);
  if (tol >= t.a_k) throw ParameterError("profile tolerance exceeds the support");
  t.tol = tol;
  t.center_coeff = std::pow(p, -p);
  t.edge_exponent = p / (p - 1.0);
  t.edge_coeff = std::pow(1.0 - 1.0 / p, t.edge_exponent);

  const Branches b{k, t.a_k, z_of_u(k, 1.0)};
  t.z_mid = b.z_mid;
  const double z_end = t.a_k - tol;
  t.u_samples.resize(n);
  t.Z_samples.resize(n);
  t.G_samples.resize(n);
  t.dG_samples.resize(n);
  Param prev{false, 0.0};
  for (std::size_t j = 0; j < n; ++j) {
    const double z = z_end * static_cast<double>(j) / static_cast<double>(n - 1);
    const bool tail = z > b.z_mid;
    const double guess = (j > 0 && tail == prev.tail) ? prev.p : -1.0;
    const Param q = b.solve(z, guess);
    t.Z_samples[j] = z;
    t.u_samples[j] = q.tail ? 1.0 / q.p : q.p;
    t.G_samples[j] = g_of(k, q);
    t.dG_samples[j] = dg_of(k, q);
    prev = q;
  }
  return t;
}

double ProfileTable::value(double Z) const {
  const double z = std::abs(Z);
  if (z >= a_k) return 0.0;
  const double d = a_k - z;
  if (d < tol) return edge_coeff * std::pow(d, edge_exponent);
  return g_of(k, table_param(*this, z));
}

double ProfileTable::derivative(double Z) const {
  const double z = std::abs(Z);
  if (z >= a_k) return 0.0;
  const double sign = Z < 0.0 ? -1.0 : 1.0;
  const double d = a_k - z;
  if (d < tol) return -sign * edge_coeff * edge_exponent * std::pow(d, edge_exponent - 1.0);
  return sign * dg_of(k, table_param(*this, z));
}

double ProfileTable::deficit(double Z) const {
  const double z = std::abs(Z);
  if (z >= a_k) return 1.0;
  if (a_k - z < tol) return 1.0 - value(z);
  return deficit_of(k, table_param(*this, z));
}

double profile_mass(const ProfileTable& table) {
  const auto& Z = table.Z_samples;
  const auto& G = table.G_samples;
  double acc = 0.0;
  for (std::size_t i = 1; i < Z.size(); ++i) acc += 0.5 * (Z[i] - Z[i - 1]) * (G[i] + G[i - 1]);
  const double d = table.a_k - Z.back();
  acc += table.edge_coeff * std::pow(d, table.edge_exponent + 1.0) / (table.edge_exponent + 1.0);
  return acc;
}

double profile_residual(const ProfileTable& table, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  const double c = 1.0 - 1.0 / (2.0 * table.k);
  const double window = (1.0 - delta) * table.a_k;
  const auto& Z = table.Z_samples;
  const auto& G = table.G_samples;
  const auto& dG = table.dG_samples;
  double primitive = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < Z.size() && Z[i] <= window; ++i) {
    if (i > 0) primitive += 0.5 * (Z[i] - Z[i - 1]) * (G[i] + G[i - 1]);
    const double r = G[i] - G[i] * G[i] + (-c * Z[i] + primitive) * dG[i];
    sup = std::max(sup, std::abs(r));
  }
  return sup;
}

Field profile_residual_field(const Field& F, int k) {
  check_k(k);
  const Grid& g = F.grid();
  if (!(g.front() <= 0.0 && g.back() >= 0.0)) throw ParameterError("Z grid must contain 0");
  const double c = 1.0 - 1.0 / (2.0 * k);
  const Field dF = derivative(F, 1);
  const Field prim = cumulative_integral(F);
  const double zero[] = {0.0};
  const double offset = interpolate_at(prim, zero, Interpolation::linear)[0];
  std::vector<double> r(F.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double z = F.node(i);
    r[i] = F[i] - F[i] * F[i] + (-c * z + prim[i] - offset) * dF[i];
  }
  return Field(F.grid_ptr(), std::move(r));
}

double profile_residual(const Field& F, int k, double z_window) {
  const Field r = profile_residual_field(F, k);
  double sup = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (std::abs(r.node(i)) <= z_window) sup = std::max(sup, std::abs(r[i]));
  return sup;
}

AsymptoticFit fit_asymptotics(const ProfileTable& table) {
  constexpr int kSamples = 41;
  std::vector<double> lx, ly, ex, ey;
  for (int i = 0; i < kSamples; ++i) {
    const double frac = static_cast<double>(i) / (kSamples - 1);
    const double z = 1e-3 * std::pow(10.0, frac);
    lx.push_back(std::log(z));
    ly.push_back(std::log(table.deficit(z)));
    const double d = 1e-4 * std::pow(10.0, 2.0 * frac);
    ex.push_back(std::log(d));
    ey.push_back(std::log(table.value(table.a_k - d)));
  }
  const LineFit center = fit_line(lx, ly);
  const LineFit edge = fit_line(ex, ey);
  return {center.slope, std::exp(center.intercept), edge.slope, std::exp(edge.intercept)};
}

GlueSegment GlueSegment::plateau(double value, double length) {
  GlueSegment s;
  s.kind = Kind::plateau;
  s.value = value;
  s.length = length;
  return s;
}

GlueSegment GlueSegment::bump(int k, double mu) {
  GlueSegment s;
  s.kind = Kind::bump;
  s.k = k;
  s.mu = mu;
  return s;
}

namespace {

struct Piece {
  double start;
  double end;
  GlueSegment seg;
  double center;  // bump centre
  double enter;
  double exit;
};

std::vector<Piece> layout(const GlueSpec& spec, double start) {
  if (spec.empty()) throw GlueSpecError("empty glue spec");
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& s = spec[i];
    std::ostringstream where;
    where << "segment " << i << ": ";
    if (s.kind == GlueSegment::Kind::plateau) {
      if (s.value != 0.0 && s.value != 1.0) throw GlueSpecError(where.str() + "plateau value must be 0 or 1");
      if (!(s.length >= 0.0)) throw GlueSpecError(where.str() + "plateau length must be >= 0");
    } else {
      if (s.k < 1) throw GlueSpecError(where.str() + "bump order must be >= 1");
      if (!(s.mu > 0.0)) throw GlueSpecError(where.str() + "bump scale must be positive");
    }
  }
  std::vector<Piece> out;
  double pos = start;
  double value = spec.front().kind == GlueSegment::Kind::plateau ? spec.front().value : 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& s = spec[i];
    if (s.kind == GlueSegment::Kind::plateau) {
      if (s.value != value) {
        std::ostringstream msg;
        msg << "junction mismatch before segment " << i << ": " << value << " meets plateau "
            << s.value;
        throw GlueSpecError(msg.str());
      }
      out.push_back({pos, pos + s.length, s, 0.0, value, value});
      pos += s.length;
      continue;
    }
    const double next = (i + 1 < spec.size() && spec[i + 1].kind == GlueSegment::Kind::plateau)
                            ? spec[i + 1].value
                            : 0.0;
    const double half = support_half_width(s.k) * s.mu;
    if (value == 1.0 && next == 1.0) {
      std::ostringstream msg;
      msg << "segment " << i << ": a bump cannot join two plateaus at value 1";
      throw GlueSpecError(msg.str());
    }
    double length = 2.0 * half, center = pos + half;
    if (value == 1.0) {
      length = half;
      center = pos;
    } else if (next == 1.0) {
      length = half;
      center = pos + half;
    }
    out.push_back({pos, pos + length, s, center, value, next});
    pos += length;
    value = next;
  }
  return out;
}

}  // namespace

std::vector<double> glue_junctions(const GlueSpec& spec, double start) {
  std::vector<double> out;
  for (const auto& p : layout(spec, start)) out.push_back(p.end);
  if (!out.empty()) out.pop_back();
  return out;
}

Field glue(const GlueSpec& spec, const GridPtr& grid) {
  const auto pieces = layout(spec, grid->front());
  std::map<int, ProfileTable> tables;
  for (const auto& p : pieces)
    if (p.seg.kind == GlueSegment::Kind::bump && !tables.count(p.seg.k))
      tables.emplace(p.seg.k, build_profile(p.seg.k));
  std::vector<double> v(grid->size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double z = (*grid)[i];
    while (j + 1 < pieces.size() && z > pieces[j].end) ++j;
    const Piece& p = pieces[j];
    if (z > p.end) {
      v[i] = p.exit;
    } else if (p.seg.kind == GlueSegment::Kind::plateau) {
      v[i] = p.seg.value;
    } else {
      v[i] = tables.at(p.seg.k).value((z - p.center) / p.seg.mu);
    }
  }
  return Field(grid, std::move(v));
}

double self_similar_profile(const ProfileTable& table, double mu, double T, double y0, double t,
                            double y) {
  const double tau = T - t;
  const double e = 1.0 - 1.0 / (2.0 * table.k);
  const double scale = std::pow(tau, e);
  const double y_star = mu * table.a_k / scale + y0;
  return table.value((y - y_star) * scale / mu) / tau;
}

double self_similar_residual(const ProfileTable& table, double mu, double T, double t,
                             const GridPtr& grid, double y0, double dt, double inner_fraction) {
  if (!(t < T)) throw ParameterError("self-similar residual needs t < T");
  if (!(mu > 0.0)) throw ParameterError("mu must be positive");
  if (!(dt > 0.0 && t + dt < T)) throw ParameterError("dt must be positive and keep t + dt < T");
  if (grid->front() > y0) throw ParameterError("grid must start at or left of y0");
  auto at = [&](double time) {
    return sample(grid, [&](double y) { return self_similar_profile(table, mu, T, y0, time, y); });
  };
  const Field psi = at(t);
  const Field plus = at(t + dt);
  const Field minus = at(t - dt);
  const Field dpsi = derivative(psi, 1);
  const Field prim = cumulative_integral(psi);
  const double e = 1.0 - 1.0 / (2.0 * table.k);
  const double half = mu * table.a_k / std::pow(T - t, e);
  const double center = y0 + half;
  double sup = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (std::abs(psi.node(i) - center) > inner_fraction * half) continue;
    const double dtpsi = (plus[i] - minus[i]) / (2.0 * dt);
    const double r = dtpsi - psi[i] * psi[i] + prim[i] * dpsi[i];
    sup = std::max(sup, std::abs(r));
  }
  return sup;
}

}  // namespace prandtl
