#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "prandtl/errors.hpp"
#include "prandtl/grid.hpp"
#include "prandtl/stencil.hpp"

using namespace prandtl;
using std::numbers::pi;

namespace {

double max_err(const Field& f, double (*exact)(double), std::size_t skip = 0) {
  double e = 0.0;
  for (std::size_t i = skip; i + skip < f.size(); ++i) e = std::max(e, std::abs(f[i] - exact(f.node(i))));
  return e;
}

}  // namespace

TEST_CASE("grid rejects short or non-monotone node lists") {
  CHECK_THROWS_AS(Grid({0, 1, 2}), ParameterError);
  CHECK_THROWS_AS(Grid({0, 1, 2, 3, 4, 5, 5, 6}), ParameterError);
  CHECK_THROWS_AS(build_grid(1.0, 4, 1.0, 0.0), ParameterError);
}

TEST_CASE("field rejects size mismatch and non-finite values") {
  auto g = uniform_grid(0, 1, 8);
  CHECK_THROWS_AS(Field(g, std::vector<double>(7, 0.0)), ParameterError);
  std::vector<double> v(8, 0.0);
  v[3] = std::nan("");
  CHECK_THROWS_AS(Field(g, v), NumericalError);
}

TEST_CASE("uniform build_grid") {
  auto g = build_grid(10.0, 11, 1.0, 0.0);
  REQUIRE(g->size() == 11);
  for (std::size_t i = 0; i < 11; ++i) CHECK((*g)[i] == doctest::Approx(double(i)).epsilon(1e-14));
}

TEST_CASE("stretched build_grid clusters at the focus") {
  auto g = build_grid(10.0, 101, 1.05, 5.0);
  REQUIRE(g->size() == 101);
  CHECK(g->front() == 0.0);
  CHECK(g->back() == doctest::Approx(10.0));
  std::size_t best = 0;
  for (std::size_t i = 0; i + 1 < g->size(); ++i)
    if (g->spacing(i) < g->spacing(best)) best = i;
  CHECK(std::abs(0.5 * ((*g)[best] + (*g)[best + 1]) - 5.0) < 2.0 * g->spacing(best));
  for (std::size_t i = 0; i + 2 < g->size(); ++i) {
    const double r = g->spacing(i + 1) / g->spacing(i);
    CHECK(r <= 1.05 + 1e-9);
    CHECK(r >= 1.0 / 1.05 - 1e-9);
  }
}

TEST_CASE("derivatives are exact on quadratics") {
  auto g = build_grid(3.0, 40, 1.03, 1.0);
  const Field f = sample(g, [](double y) { return y * y; });
  const Field d1 = derivative(f, 1);
  const Field d2 = derivative(f, 2);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(d1[i] == doctest::Approx(2.0 * f.node(i)).epsilon(1e-9));
    CHECK(d2[i] == doctest::Approx(2.0).epsilon(1e-7));
  }
}

TEST_CASE("derivative refinement is second order") {
  double prev1 = 0.0, prev2 = 0.0;
  for (int level = 0; level < 3; ++level) {
    const std::size_t n = 50 * (1u << level) + 1;
    auto g = uniform_grid(0.0, 3.0, n);
    const Field f = sample(g, [](double y) { return std::sin(y); });
    const double e1 = max_err(derivative(f, 1), [](double y) { return std::cos(y); });
    const double e2 = max_err(derivative(f, 2), [](double y) { return -std::sin(y); }, 1);
    if (level > 0) {
      CHECK(prev1 / e1 >= 3.5);
      CHECK(prev2 / e2 >= 3.5);
    }
    prev1 = e1;
    prev2 = e2;
  }
}

TEST_CASE("stencil weights reproduce polynomials") {
  const double x[] = {0.0, 0.3, 0.7, 1.5};
  const auto w = stencil_weights(0.2, x, 1);
  double acc = 0.0;
  for (int j = 0; j < 4; ++j) acc += w[j] * x[j] * x[j] * x[j];
  CHECK(acc == doctest::Approx(3.0 * 0.04).epsilon(1e-12));
}

TEST_CASE("cumulative integral") {
  auto g = uniform_grid(0.0, 10.0, 11);
  const Field one = sample(g, [](double) { return 1.0; });
  const Field c = cumulative_integral(one);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(c.node(i)).epsilon(1e-14));

  auto h = build_grid(4.0, 37, 1.1, 2.0);
  const Field lin = sample(h, [](double y) { return 2.0 * y; });
  const Field cl = cumulative_integral(lin);
  for (std::size_t i = 0; i < cl.size(); ++i) CHECK(cl[i] == doctest::Approx(cl.node(i) * cl.node(i)).epsilon(1e-12));

  auto fine = uniform_grid(0.0, pi, 20001);
  const Field bump = sample(fine, [](double y) { return std::cos(0.5 * y) * std::cos(0.5 * y); });
  CHECK(cumulative_integral(bump)[fine->size() - 1] == doctest::Approx(pi / 2).epsilon(1e-8));
}

TEST_CASE("derivative of the primitive returns the field") {
  auto g = uniform_grid(0.0, 2.0, 401);
  const Field f = sample(g, [](double y) { return std::exp(-y) * std::cos(3 * y); });
  const Field back = derivative(cumulative_integral(f), 1);
  double e = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs(back[i] - f[i]));
  CHECK(e < 1e-3);
}

TEST_CASE("simpson integral is fourth order on nonuniform meshes") {
  auto err = [](int n) {
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (n - 1);
      x[i] = 2.0 * (t + 0.6 * t * t) / 1.6;
      y[i] = std::exp(x[i]);
    }
    return std::abs(integrate_simpson(x, y) - (std::exp(2.0) - 1.0));
  };
  CHECK(err(81) < 1e-7);
  CHECK(err(41) / err(81) > 12.0);
  CHECK(err(80) / err(160) > 12.0);
  std::vector<double> x = {0, 1}, y = {1, 3};
  CHECK(integrate_simpson(x, y) == doctest::Approx(2.0));
}

TEST_CASE("interpolation") {
  auto g = build_grid(5.0, 60, 1.02, 2.0);
  const Field lin = sample(g, [](double y) { return 3.0 * y - 1.0; });
  const std::vector<double> pts = {0.0, 0.123, 1.7, 4.99, 5.0};
  for (auto method : {Interpolation::monotone_cubic, Interpolation::cubic_spline, Interpolation::linear}) {
    const auto v = interpolate_at(lin, pts, method);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(v[i] == doctest::Approx(3.0 * pts[i] - 1.0).epsilon(1e-12));
  }
  const Field same = interpolate(lin, g);
  for (std::size_t i = 0; i < same.size(); ++i) CHECK(same[i] == doctest::Approx(lin[i]).epsilon(1e-14));
  const double outside[] = {5.1};
  CHECK_THROWS_AS(interpolate_at(lin, outside), RangeError);
}

TEST_CASE("monotone cubic interpolation: no overshoot and fourth-order convergence") {
  auto step = uniform_grid(0.0, 1.0, 21);
  const Field s = sample(step, [](double y) { return y < 0.5 ? 0.0 : 1.0; });
  auto dense = uniform_grid(0.0, 1.0, 2001);
  const Field si = interpolate(s, dense);
  for (std::size_t i = 0; i < si.size(); ++i) {
    CHECK(si[i] >= -1e-15);
    CHECK(si[i] <= 1.0 + 1e-15);
  }
  double prev = 0.0;
  for (int level = 0; level < 3; ++level) {
    const std::size_t cells = 30u << level;
    auto g = uniform_grid(0.0, 3.0, cells + 1);
    const Field c = sample(g, [](double y) { return std::cos(y); });
    std::vector<double> mids;
    for (std::size_t i = 0; i < cells; ++i) mids.push_back(3.0 * (i + 0.5) / cells);
    const auto v = interpolate_at(c, mids);
    double e = 0.0;
    for (std::size_t i = 0; i < mids.size(); ++i) e = std::max(e, std::abs(v[i] - std::cos(mids[i])));
    if (level > 0) CHECK(prev / e >= 10.0);
    prev = e;
  }
}

TEST_CASE("remesh") {
  auto g = build_grid(20.0, 201, 1.0, 0.0);
  const Field bump = sample(g, [](double y) { return y > 2.0 && y < 6.0 ? std::pow(std::sin(pi * (y - 2.0) / 4.0), 4) : 0.0; });
  const Field same = remesh(bump, 0.0, 20.0);
  for (std::size_t i = 0; i < same.size(); ++i) CHECK(std::abs(same[i] - bump[i]) <= 1e-10);

  RemeshOptions o;
  o.n = 401;
  const Field doubled = remesh(bump, 4.0, 40.0, o);
  CHECK(doubled.grid().back() == doctest::Approx(40.0));
  CHECK(integrate(doubled) == doctest::Approx(integrate(bump)).epsilon(1e-8));

  const Field wall = sample(g, [](double) { return 0.1; });
  o.threshold = 1e-6;
  CHECK_THROWS_AS(remesh(wall, 0.0, 40.0, o), DomainTruncationError);
  CHECK_THROWS_AS(remesh(bump, 0.0, 10.0), ParameterError);
}

TEST_CASE("operations leave their inputs unchanged") {
  auto g = uniform_grid(0.0, 1.0, 16);
  const Field f = sample(g, [](double y) { return y * y * y; });
  const std::vector<double> before(f.values().begin(), f.values().end());
  (void)derivative(f, 2);
  (void)cumulative_integral(f);
  (void)interpolate(f, uniform_grid(0.0, 1.0, 9));
  CHECK(std::equal(before.begin(), before.end(), f.values().begin()));
}
