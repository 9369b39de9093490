#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "prandtl/errors.hpp"
#include "prandtl/grid.hpp"
#include "prandtl/nonlocal.hpp"

using namespace prandtl;
using std::numbers::pi;

namespace {

// k^{(-i)}(y) = y^{i/2} I_i(2 sqrt(y)).
double bessel_oracle(int i, double y) {
  return std::pow(y, 0.5 * i) * boost::math::cyl_bessel_i(i, 2.0 * std::sqrt(y));
}

double rel_sup(const Field& a, const Field& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

}  // namespace

TEST_CASE("kernel values") {
  CHECK(kernel(0.0) == 1.0);
  CHECK(kernel(-1.0) == 0.0);
  long double s = 0.0L, term = 1.0L;
  for (int n = 0; n < 40; ++n) {
    s += term;
    term /= static_cast<long double>(n + 1) * (n + 1);
  }
  CHECK(kernel(1.0) == doctest::Approx(static_cast<double>(s)).epsilon(1e-15));
  CHECK(kernel(1.0) == doctest::Approx(2.2795853023360673).epsilon(1e-15));
  for (double y : {0.01, 0.5, 3.0, 25.0, 99.0, 101.0, 400.0, 5e4})
    CHECK(kernel(y) == doctest::Approx(bessel_oracle(0, y)).epsilon(1e-13));
}

TEST_CASE("primitives and derivative") {
  for (int i = 0; i <= 4; ++i) {
    CHECK(kernel_primitive(i, 0.0) == (i == 0 ? 1.0 : 0.0));
    for (double y : {0.2, 1.0, 7.5, 150.0})
      CHECK(kernel_primitive(i, y) == doctest::Approx(bessel_oracle(i, y)).epsilon(1e-13));
  }
  for (double y : {0.3, 2.0, 12.0}) {
    const double h = 1e-5;
    const double fd = (kernel_primitive(1, y + h) - kernel_primitive(1, y - h)) / (2 * h);
    CHECK(std::abs(fd - kernel(y)) / kernel(y) < 1e-8);
    CHECK(kernel_derivative(y) == doctest::Approx(bessel_oracle(1, y) / y).epsilon(1e-13));
  }
  // k^{(-i)}(y) <= C y^i on (0, 1].
  for (int i = 1; i <= 4; ++i) {
    double c = 0.0;
    for (int j = 1; j <= 1000; ++j) {
      const double y = j / 1000.0;
      c = std::max(c, kernel_primitive(i, y) / std::pow(y, i));
    }
    CHECK(c <= kernel_primitive(i, 1.0) + 1e-12);
    CHECK(kernel_primitive(i, 1e-3) / 1e-3 / std::pow(1e-3, i - 1) == doctest::Approx(1.0 / std::tgamma(i + 1)).epsilon(1e-3));
  }
  CHECK_THROWS_AS(kernel_primitive(-1, 1.0), ParameterError);
}

TEST_CASE("kernel ode identity") {
  CHECK(kernel_ode_check(1.0) <= 1e-12);
  CHECK(kernel_ode_check(10.0) / kernel(10.0) <= 1e-12);
  CHECK(kernel_ode_check(1e-8) < 1e-15);
  for (double y : {0.5, 50.0, 200.0}) CHECK(kernel_ode_check(y) / kernel(y) <= 1e-12);
}

TEST_CASE("log-space evaluation") {
  KernelEvaluator plain;
  plain.log_space_from = 1e9;
  KernelEvaluator logged;
  logged.log_space_from = 0.0;
  for (double y : {150.0, 600.0})
    CHECK(logged(y) == doctest::Approx(plain(y)).epsilon(1e-13));
  CHECK(std::isinf(kernel(2e5)));
  // Large-argument expansion of log I_0(z).
  const double z = 2.0 * std::sqrt(2e5);
  const double asym = z - 0.5 * std::log(2.0 * pi * z) + std::log1p(1.0 / (8.0 * z) + 9.0 / (128.0 * z * z));
  CHECK(KernelEvaluator{}.log_primitive(0, 2e5) == doctest::Approx(asym).epsilon(1e-12));
}

TEST_CASE("truncation stays within the tail bound") {
  KernelEvaluator loose;
  loose.tol = 1e-8;
  for (double y : {0.5, 5.0, 40.0}) {
    const double exact = bessel_oracle(0, y);
    CHECK(std::abs(loose(y) - exact) / exact <= 1e-8);
    CHECK(std::abs(kernel(y) - exact) / exact <= 1e-14);
  }
  KernelEvaluator tiny;
  tiny.max_terms = 3;
  CHECK_THROWS_AS(tiny(50.0), NumericalError);
}

TEST_CASE("green solution examples") {
  auto g = uniform_grid(0.0, 5.0, 1001);
  const Field one = sample(g, [](double) { return 1.0; });
  const Field u1 = green_solution(one, 0.7, g);
  for (std::size_t i = 0; i < u1.size(); ++i) REQUIRE(u1[i] == doctest::Approx(kernel(0.7 * u1.node(i))).epsilon(1e-10));

  const Field bump = sample(g, [](double x) { return std::sin(x) * std::exp(-x); });
  const Field u0 = green_solution(bump, 0.0, g);
  for (std::size_t i = 0; i < u0.size(); ++i) REQUIRE(std::abs(u0[i] - bump[i]) < 1e-14);

  const Field lin = sample(g, [](double x) { return x; });
  const Field ul = green_solution(lin, 1.3, g);
  for (std::size_t i = 0; i < ul.size(); ++i)
    REQUIRE(std::abs(ul[i] - kernel_primitive(1, 1.3 * ul.node(i)) / 1.3) < 1e-8);

  CHECK_THROWS_AS(green_solution(one, 1.0, uniform_grid(0.0, 6.0, 11)), RangeError);
  CHECK_THROWS_AS(green_solution(one, -1.0, g), ParameterError);
  CHECK_THROWS_AS(green_solution(sample(uniform_grid(1.0, 5.0, 11), [](double) { return 1.0; }), 1.0, g),
                  ParameterError);
}

TEST_CASE("direct stepping agrees with the green solution") {
  auto g = uniform_grid(0.0, 5.0, 1001);
  const Field zero = sample(g, [](double) { return 0.0; });
  const Field still = direct_solve_nonlocal(zero, 1.0, 1e-2);
  for (double v : still.values()) REQUIRE(v == 0.0);

  const Field one = sample(g, [](double) { return 1.0; });
  const Field d1 = direct_solve_nonlocal(one, 1.0, 1e-3);
  for (std::size_t i = 0; i < d1.size(); ++i) REQUIRE(std::abs(d1[i] - kernel(d1.node(i))) / kernel(d1.node(i)) < 1e-4);

  const std::vector<std::function<double(double)>> data = {
      [](double x) { return std::exp(-x) * std::cos(2.0 * x); },
      [](double x) { return 1.0 / (1.0 + x * x); },
      [](double x) { return x * x * std::exp(-0.5 * x); },
  };
  for (const auto& f : data) {
    const Field u0 = sample(g, f);
    CHECK(rel_sup(direct_solve_nonlocal(u0, 1.0, 1e-3), green_solution(u0, 1.0, g)) < 1e-4);
  }

  const NonlocalState s0{0.0, one};
  const NonlocalState s1 = direct_step_nonlocal(s0, 0.1);
  CHECK(s1.t == doctest::Approx(0.1));
  // One midpoint step: u + dt x + dt^2 x^2 / 4 for u = 1.
  CHECK(s1.u[1000] == doctest::Approx(1.0 + 0.5 + 0.01 * 25.0 / 4.0).epsilon(1e-6));
  CHECK_THROWS_AS(direct_solve_nonlocal(one, 1.0, 0.0), ParameterError);
}

TEST_CASE("growth is slower than exponential") {
  auto g = uniform_grid(0.0, 100.0, 4001);
  const Field u = direct_solve_nonlocal(sample(g, [](double) { return 1.0; }), 1.0, 1e-3);
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.node(i);
    if (x < 10.0) continue;
    const double r = std::log(u[i]) / std::sqrt(x);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(hi <= 2.0);
  CHECK(lo > 1.0);
}

TEST_CASE("scaling symmetry") {
  auto g = uniform_grid(0.0, 8.0, 1601);
  const double lam = 2.0, t = 0.6;
  auto f = [](double x) { return std::exp(-x) + 0.3 * std::sin(x); };
  const Field u0 = sample(g, f);
  const Field rescaled0 = sample(g, [&](double x) { return f(x / lam); });
  // w(t, x) = u(lam t, x / lam) has datum u0(x / lam).
  const Field w = green_solution(rescaled0, t, g);
  auto half = uniform_grid(0.0, 4.0, 801);
  const Field u = green_solution(u0, lam * t, half);
  for (std::size_t i = 0; i < u.size(); ++i) REQUIRE(std::abs(w[2 * i] - u[i]) / std::abs(u[i]) < 1e-5);
}

TEST_CASE("transported solution") {
  auto g = uniform_grid(0.0, 1.0, 401);
  const Field v0 = sample(g, [](double x) { return x * x * std::exp(-x); });
  const Field same = transported_solution(v0, 0.0);
  for (std::size_t i = 0; i < same.size(); ++i) REQUIRE(same[i] == doctest::Approx(v0[i]).scale(1.0).epsilon(1e-10));

  // v solves v_t = int_0^x v - x v_x: check by differences at an interior point.
  const double t = 0.5, h = 1e-4;
  const Field vp = transported_solution(v0, t + h), vm = transported_solution(v0, t - h), v = transported_solution(v0, t);
  const Field vx = derivative(v, 1), P = cumulative_integral(v);
  double sup = 0.0;
  for (std::size_t i = 40; i < 360; ++i) {
    const double vt = (vp[i] - vm[i]) / (2 * h);
    sup = std::max(sup, std::abs(vt - P[i] + v.node(i) * vx[i]));
  }
  CHECK(sup < 1e-4);

  const std::vector<double> times = {4, 5, 6, 7, 8, 9, 10};
  const auto l2 = compact_decay(v0, 1.0, times);
  CHECK(l2.times.size() == times.size());
  CHECK(l2.slope == doctest::Approx(-2.0).epsilon(0.1));
  CHECK(l2.r2 > 0.99);

  const Field v1 = sample(g, [](double x) { return x * std::exp(-x); });
  CHECK(compact_decay(v1, 1.0, times).slope == doctest::Approx(-1.0).epsilon(0.1));

  const Field c = sample(g, [](double) { return 1.0; });
  const auto l0 = compact_decay(c, 1.0, times);
  for (double v : l0.sup_compact) CHECK(v >= 1.0);
  CHECK(l0.slope >= 0.0);
}
