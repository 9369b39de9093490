#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "prandtl/errors.hpp"
#include "prandtl/grid.hpp"
#include "prandtl/modulation.hpp"
#include "prandtl/profiles.hpp"
#include "prandtl/spectral.hpp"

using namespace prandtl;
using std::numbers::pi;

namespace {

Field planted(double lam, double mu, double shift, int mode, double amp) {
  auto grid = uniform_grid(-14.0, 14.0, 5601);
  return sample(grid, [&](double y) {
    const double Y = y - shift;
    return lam * lam * g1_exact(Y / (lam * lam * mu)) + amp * hermite(mode, Y);
  });
}

double max_abs(const std::array<double, 3>& a) {
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
}

// Exact self-similar snapshot with lambda = (T - t)^{-1/2} and a = 0.
SolverState self_similar_snapshot(double T, double t, double mu) {
  const double lam = 1.0 / std::sqrt(T - t);
  const double ys = lam * mu * pi;
  auto g = uniform_grid(0.0, 2.5 * ys + 10.0, static_cast<std::size_t>((2.5 * ys + 10.0) / 0.02) + 1);
  return make_state(sample(g, [&](double y) { return lam * lam * g1_exact((y - ys) / (lam * mu)); }), t);
}

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

TEST_CASE("scaled G_1 and its continuation") {
  CHECK(scaled_g1(2.0, 1.0, 0.0) == doctest::Approx(4.0));
  CHECK(scaled_g1(2.0, 0.25, pi) == doctest::Approx(4.0 * g1_exact(pi / 2.0)));
  CHECK(scaled_g1(2.0, 0.25, 7.0) == 0.0);
  CHECK(scaled_g1(1.0, 0.0, 3.0) == doctest::Approx(1.0));
  CHECK(scaled_g1(1.0, -0.04, 3.0) == doctest::Approx(0.5 * (1.0 + std::cosh(0.2 * 3.0))));
  // Continuous through c^2 = 0.
  CHECK(scaled_g1(1.0, 1e-12, 2.0) == doctest::Approx(scaled_g1(1.0, -1e-12, 2.0)).epsilon(1e-10));
}

TEST_CASE("frames") {
  const double lam = 5.0, mu = 1.1, ys = 60.0;
  auto g = uniform_grid(0.0, 120.0, 12001);
  const Field xi = sample(g, [&](double y) { return lam * lam * g1_exact((y - ys) / (lam * mu)); });
  const auto pf = to_parabolic_frame(xi, lam, ys, 3.0);
  CHECK(pf.s == 3.0);
  CHECK(pf.f.grid().front() == doctest::Approx(-12.0));
  CHECK(pf.f.grid().back() == doctest::Approx(12.0));
  CHECK(pf.f.max_value() == doctest::Approx(1.0).epsilon(1e-6));
  const double zero[] = {0.0};
  CHECK(interpolate_at(pf.f, zero)[0] == doctest::Approx(1.0).epsilon(1e-8));
  double e = 0.0;
  for (std::size_t i = 0; i < pf.f.size(); ++i)
    e = std::max(e, std::abs(pf.f[i] - g1_exact(pf.f.node(i) / (lam * lam * mu))));
  CHECK(e < 1e-8);

  // Near the wall the frame starts at -lambda y*.
  const auto near = to_parabolic_frame(xi, 0.5, 4.0, 0.0);
  CHECK(near.f.grid().front() == doctest::Approx(-2.0));

  const auto zf = to_profile_frame(xi, lam, mu, ys, uniform_grid(-pi, pi, 721));
  for (std::size_t i = 0; i < zf.u.size(); ++i) REQUIRE(std::abs(zf.u[i]) < 1e-6);
  CHECK_THROWS_AS(to_parabolic_frame(xi, -1.0, ys, 0.0), ParameterError);
  CHECK_THROWS_AS(to_parabolic_frame(xi, lam, 119.0, 0.0), FrameError);
}

TEST_CASE("decompose recovers planted parameters") {
  SUBCASE("exact profile") {
    const auto d = decompose(planted(1.0, 1.0, 0.0, 0, 0.0), {});
    CHECK(d.lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.mu == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(d.shift) < 1e-12);
    CHECK(d.c2 == doctest::Approx(1.0).epsilon(1e-12));
    double eps = 0.0;
    for (double v : d.eps.values()) eps = std::max(eps, std::abs(v));
    CHECK(eps < 1e-10);
  }
  SUBCASE("orthogonal remainder") {
    const auto d = decompose(planted(1.0 + 1e-3, 1.2, 0.05, 3, 1e-4), {});
    CHECK(std::abs(d.lambda - (1.0 + 1e-3)) < 1e-8);
    CHECK(std::abs(d.mu - 1.2) < 1e-8);
    CHECK(std::abs(d.shift - 0.05) < 1e-8);
    CHECK(max_abs(d.orthogonality) < 1e-10);
    CHECK(d.residual <= 1e-10);
    CHECK(d.iterations > 0);
    // eps is the planted h_3 term, read on the input grid.
    double e = 0.0;
    for (std::size_t i = 0; i < d.eps.size(); ++i)
      if (std::abs(d.eps.node(i)) < 5.0) e = std::max(e, std::abs(d.eps[i] - 1e-4 * hermite(3, d.eps.node(i))));
    CHECK(e < 1e-8);
  }
  SUBCASE("low-mode perturbation moves the translation") {
    const auto d = decompose(planted(1.0, 1.0, 0.0, 1, 1e-4), {});
    CHECK(std::abs(d.shift) > 1e-6);
    CHECK(std::abs(d.shift) < 1e-3);
    CHECK(max_abs(d.orthogonality) < 1e-10);
  }
  SUBCASE("plant-then-decompose is the identity for small perturbations") {
    for (double amp : {1e-6, 1e-4, 1e-3}) {
      const auto d = decompose(planted(0.98, 0.9, -0.1, 4, amp), {1.0, 1.0, 0.0});
      CHECK(std::abs(d.lambda - 0.98) < 1e-8);
      CHECK(std::abs(d.mu - 0.9) < 1e-8);
      CHECK(std::abs(d.shift + 0.1) < 1e-8);
    }
  }
  SUBCASE("no profile to lock onto") {
    auto grid = uniform_grid(-14.0, 14.0, 2801);
    CHECK_THROWS_AS(decompose(sample(grid, [](double) { return 0.0; }), {}), DecompositionError);
  }
}

TEST_CASE("lambda squared integral") {
  // lambda^{-2} = T - t.
  const double T = 1.0;
  const double v = lambda_squared_integral(0.2, 1.0 / std::sqrt(T - 0.2), 0.9, 1.0 / std::sqrt(T - 0.9));
  CHECK(v == doctest::Approx(std::log(0.8 / 0.1)).epsilon(1e-12));
  CHECK(lambda_squared_integral(0.0, 2.0, 0.5, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("tracking an exact self-similar sequence") {
  const double T = 1.0, mu = 1.1;
  std::vector<SolverState> snaps;
  for (int j = 0; j <= 12; ++j) snaps.push_back(self_similar_snapshot(T, 1.0 - std::pow(10.0, -j / 4.0), mu));
  snaps.front().t = 0.0;
  const auto states = track(snaps);
  REQUIRE(states.size() == snaps.size());
  const double c0 = states[0].s + std::log(T - states[0].t);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double lam = 1.0 / std::sqrt(T - snaps[k].t);
    CHECK(states[k].s + std::log(T - states[k].t) == doctest::Approx(c0).epsilon(1e-3));
    CHECK(states[k].lambda == doctest::Approx(lam).epsilon(1e-6));
    CHECK(states[k].mu == doctest::Approx(mu).epsilon(1e-6));
    CHECK(std::abs(states[k].a) < 1e-5);
    CHECK(states[k].y_star == doctest::Approx(lam * mu * (pi + states[k].a)).epsilon(1e-9));
    if (k > 0) CHECK(states[k].s > states[k - 1].s);
  }
  CHECK(std::abs(c0) < 1e-6);

  // Self-similar data obey mu_s = 0 and lambda_s / lambda = 1/2 exactly.
  const auto res = modulation_residuals(states);
  for (const auto& r : res) {
    const double lam = std::exp(0.5 * r.s);
    CHECK(r.r_lambda == doctest::Approx(1.0 / (4.0 * std::pow(lam, 4) * mu * mu)).epsilon(1e-2).scale(1e-6));
  }
}

TEST_CASE("modulation residual algebra") {
  SUBCASE("constant parameters") {
    std::vector<ModulationState> st;
    for (int k = 0; k < 5; ++k) st.push_back({0.1 * k, 0.0, 2.0, 0.5, 0.0, 0.0, 0.0});
    const auto r = modulation_residuals(st);
    REQUIRE(r.size() == 5);
    const double x = 1.0 / (std::pow(2.0, 4) * 0.25);
    for (const auto& v : r) {
      CHECK(v.r_lambda == doctest::Approx(-0.5 + 0.25 * x));
      CHECK(v.r_mu == doctest::Approx(-0.5 * x));
    }
  }
  SUBCASE("parameters following the laws") {
    // RK4 for d log lambda/ds = 1/2 - 1/(4 l^4 m^2), d log mu/ds = 1/(2 l^4 m^2).
    auto rhs = [](double L, double M) {
      const double x = std::exp(-4.0 * L - 2.0 * M);
      return std::pair{0.5 - 0.25 * x, 0.5 * x};
    };
    double L = std::log(1.2), M = std::log(0.8), s = 0.0;
    const double h = 1e-3;
    std::vector<ModulationState> st;
    for (int k = 0; k <= 4000; ++k) {
      if (k % 20 == 0) st.push_back({s, 0.0, std::exp(L), std::exp(M), 0.0, 0.0, 0.0});
      auto [a1, b1] = rhs(L, M);
      auto [a2, b2] = rhs(L + 0.5 * h * a1, M + 0.5 * h * b1);
      auto [a3, b3] = rhs(L + 0.5 * h * a2, M + 0.5 * h * b2);
      auto [a4, b4] = rhs(L + h * a3, M + h * b3);
      L += h * (a1 + 2 * a2 + 2 * a3 + a4) / 6.0;
      M += h * (b1 + 2 * b2 + 2 * b3 + b4) / 6.0;
      s += h;
    }
    const auto r = modulation_residuals(st);
    for (std::size_t k = 1; k + 1 < r.size(); ++k) {
      CHECK(std::abs(r[k].r_lambda) < 1e-4);
      CHECK(std::abs(r[k].r_mu) < 1e-4);
    }
    CHECK(std::abs(r.front().r_lambda) < 1e-3);
  }
  SUBCASE("thirds decay") {
    std::vector<ModulationResidual> r;
    for (int k = 0; k <= 90; ++k) r.push_back({0.1 * k, 0.0, std::exp(-0.1 * k)});
    const auto d = r_mu_decay(r);
    double first = 0.0, last = 0.0;
    int nf = 0, nl = 0;
    for (const auto& v : r) {
      if (v.s <= 3.0) first += v.r_mu, ++nf;
      if (v.s >= 6.0) last += v.r_mu, ++nl;
    }
    CHECK(d.first == doctest::Approx(first / nf).epsilon(0.05));
    CHECK(d.last == doctest::Approx(last / nl).epsilon(0.05));
    CHECK(d.ratio == doctest::Approx(d.first / d.last));
    CHECK(d.ratio > 10.0);
  }
  CHECK_THROWS_AS(modulation_residuals(std::vector<ModulationState>(2)), ParameterError);
}

TEST_CASE("shape function q") {
  CHECK(shape_q(0.0) == 0.0);
  CHECK(shape_q(pi) == doctest::Approx(1.0));
  CHECK(shape_q(5.0) == 1.0);
  CHECK(shape_q(-1.0) == shape_q(1.0));
  for (int i = 1; i < 100; ++i) REQUIRE(shape_q(pi * i / 100.0) > shape_q(pi * (i - 1) / 100.0));
}

TEST_CASE("weight w") {
  for (double s : {std::exp(1.0), 10.0, 1e3}) {
    CHECK(weight_w(s, pi) == doctest::Approx(1.0 / s).epsilon(1e-12));
    CHECK(weight_w(s, 4.0) == doctest::Approx(1.0 / s));
    CHECK(weight_w(s, -4.0) == doctest::Approx(1.0 / s));
    CHECK(weight_w(s, -0.7) == weight_w(s, 0.7));
    CHECK(std::abs(weight_w(s, pi - 1e-9) - weight_w(s, pi + 1e-9)) < 1e-12);
    for (int i = 1; i < 100; ++i) REQUIRE(weight_w_ds(s, pi * i / 100.0) <= 0.0);
  }
  double lo = 1e300, hi = 0.0;
  for (double s : {std::exp(1.0), 10.0, 100.0, 1e4})
    for (int i = 0; i <= 400; ++i) {
      const double z = 0.01 + (0.99 * pi - 0.01) * i / 400.0;
      const double r = weight_w(s, z) * std::pow(z, 7) * std::pow(s, shape_q(z));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  CHECK(lo > 0.0);
  CHECK(hi / lo < 1e3);
  // Derivative in s against a centred difference.
  const double h = 1e-5;
  CHECK(weight_w_ds(10.0, 1.3) ==
        doctest::Approx((weight_w(10.0 + h, 1.3) - weight_w(10.0 - h, 1.3)) / (2 * h)).epsilon(1e-6));
  CHECK_THROWS_AS(weight_w(10.0, 0.0), RangeError);
  CHECK_THROWS_AS(weight_w(2.0, 1.0), ParameterError);
}

TEST_CASE("vector field A") {
  CHECK(vector_A(pi / 4.0) == doctest::Approx(std::sin(pi / 4.0)));
  CHECK(vector_A(2.0) == 1.0);
  CHECK(vector_A(-2.0) == -1.0);
  CHECK(vector_A(-0.3) == -vector_A(0.3));
  CHECK(std::abs(vector_A(pi / 2.0 - 1e-12) - vector_A(pi / 2.0 + 1e-12)) < 1e-11);
  double sup = 0.0;
  for (int i = -4000; i <= 4000; ++i) {
    const double z = pi * i / 4000.0;
    sup = std::max(sup, std::abs(vector_A(z) * -0.5 * std::sin(z)));
  }
  CHECK(sup <= 1.0);
}

TEST_CASE("local operator") {
  CHECK(local_operator_checks(0.5, -1.0) <= 1e-12);
  for (double z : {-2.5, -0.4, 0.7, 2.0}) {
    CHECK(phi_beta(0.0, z) == doctest::Approx(std::sin(z) * std::sin(z)));
    CHECK(transport_T(z) == doctest::Approx(0.5 * std::sin(z)));
    CHECK(potential_V(z) == doctest::Approx(-std::cos(z)));
    CHECK(local_operator_checks(0.0, z) <= 1e-12);
    for (double beta : {-1.0, 0.25, 2.0}) CHECK(local_operator_checks(beta, z) <= 1e-10);
  }
  CHECK(phi_beta(1.0, 2.0 * pi) == doctest::Approx(1.0));
  CHECK(potential_V(2.0 * pi) == doctest::Approx(1.0));
  CHECK(local_operator_checks(1.0, 2.0 * pi) == doctest::Approx(0.0).scale(1.0));
  for (double beta : {0.5, 3.0}) CHECK(local_operator_checks(beta, 5.0) <= 1e-10);
  // Analytic derivative against a difference quotient.
  const double h = 1e-6;
  CHECK(phi_beta_derivative(0.5, 1.1) ==
        doctest::Approx((phi_beta(0.5, 1.1 + h) - phi_beta(0.5, 1.1 - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("H annihilates the scaling mode") {
  auto g = uniform_grid(-pi, pi, 8001);
  const Field u = sample(g, [](double z) { return z * -0.5 * std::sin(z); });
  const Field Hu = apply_H(u);
  double sup = 0.0;
  for (std::size_t i = 0; i < Hu.size(); ++i)
    if (std::abs(Hu.node(i)) < 0.95 * pi) sup = std::max(sup, std::abs(Hu[i]));
  CHECK(sup < 1e-5);
  // A generic field is not in the kernel.
  const Field v = sample(g, [](double z) { return std::cos(z); });
  double sv = 0.0;
  for (double x : apply_H(v).values()) sv = std::max(sv, std::abs(x));
  CHECK(sv > 0.1);
}

TEST_CASE("exterior norms") {
  const double s = 4.0, a = 0.0, M = 20.0;
  auto g = exterior_grid(s, a, M, 2.0 * pi);
  CHECK(g->front() <= -pi - a);
  CHECK(g->back() == doctest::Approx(2.0 * pi));
  const double cut = M * std::exp(-s);
  const double cuts[] = {-cut, cut};
  for (double c : cuts) {
    const std::size_t i = g->locate(c);
    CHECK(std::min(std::abs((*g)[i] - c), std::abs((*g)[i + 1] - c)) < 1e-12);
  }

  const auto zero = exterior_norms(sample(g, [](double) { return 0.0; }), s, a, M);
  CHECK(zero.left_l2 == 0.0);
  CHECK(zero.right_l2 == 0.0);
  CHECK(zero.left_h1 == 0.0);
  CHECK(zero.right_h1 == 0.0);

  const Field u = sample(g, [](double z) { return std::pow(z, 4); });
  const auto n = exterior_norms(u, s, a, M);
  auto l2 = [&](double z) { return std::pow(z, 8) * weight_w(s, z); };
  auto h1 = [&](double z) { return std::pow(vector_A(z) * 4.0 * std::pow(z, 3), 2) * weight_w(s, z); };
  const double right_l2 = gk(l2, cut, pi) + gk(l2, pi, 2.0 * pi);
  const double left_l2 = gk(l2, -pi, -cut);
  const double right_h1 = gk(h1, cut, pi) + gk(h1, pi, 2.0 * pi);
  CHECK(std::isfinite(n.right_l2));
  CHECK(n.right_l2 == doctest::Approx(right_l2).epsilon(1e-4));
  CHECK(n.left_l2 == doctest::Approx(left_l2).epsilon(1e-4));
  // u' comes from finite differences.
  CHECK(n.right_h1 == doctest::Approx(right_h1).epsilon(1e-3));
  CHECK(n.left_h1 == doctest::Approx(gk(h1, -pi, -cut)).epsilon(1e-3));
}

TEST_CASE("frame residual") {
  // xi = 1/(T - t): f = 1, lambda = e^{s/2}, y* fixed.
  const double T = 1.0, y_star = 50.0;
  auto g = uniform_grid(0.0, 100.0, 10001);
  std::vector<SolverState> slices;
  std::vector<ModulationState> states;
  for (double t : {0.5 - 1e-3, 0.5, 0.5 + 1e-3}) {
    slices.push_back(make_state(sample(g, [&](double y) { return y > 0.0 ? 1.0 / (T - t) : 0.0; }), t));
    states.push_back({-std::log(T - t), t, 1.0 / std::sqrt(T - t), 1.0, 0.0, y_star, 0.0});
  }
  const auto r = frame_residual(slices, states);
  CHECK(r.largest_term == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.residual < 1e-5);
  FrameResidualOptions bad;
  bad.lambda_s_scale = 2.0;
  const auto rb = frame_residual(slices, states, bad);
  CHECK(rb.residual > 5.0 * r.residual);
  CHECK(rb.residual > 0.3);
  CHECK_THROWS_AS(frame_residual(std::span(slices).first(2), std::span(states).first(2)), ParameterError);
}

TEST_CASE("trapped check") {
  const double s = 6.0;
  ModulationState st{s, 0.0, std::exp(s / 2.0), 1.0, 1e-3, 0.0, 0.0};
  ExteriorNorms small{1e-6, 1e-6, 1.0, 1.0};
  const auto c = trapped_check(st, small);
  CHECK(c.all());
  CHECK(c.scaled_l2 == doctest::Approx(std::exp(0.98 * s) * 2e-6));
  ModulationState far = st;
  far.lambda = 1e-3;
  CHECK_FALSE(trapped_check(far, small).lambda_ok);
  ExteriorNorms big{1e3, 0.0, 0.0, 0.0};
  CHECK_FALSE(trapped_check(st, big).l2_ok);
  ModulationState shifted = st;
  shifted.a = 10.0;
  CHECK_FALSE(trapped_check(shifted, small).a_ok);
}
