#include "prandtl/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "prandtl/errors.hpp"

namespace prandtl {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double value;
  double error;
};

Panel kronrod15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double gauss = fc * kWg[3];
  double kronrod = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double s = f(c - x) + f(c + x);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

struct Adaptive {
  const std::function<double(double)>& f;
  double abs_tol;
  int max_depth;
  int evaluations = 0;
  bool failed = false;

  Panel run(double a, double b, Panel whole, double tol, int depth) {
    if (!std::isfinite(whole.value)) {
      failed = true;
      return whole;
    }
    if (whole.error <= tol || b - a <= 1e-15 * std::max(1.0, std::abs(a))) return whole;
    if (depth >= max_depth) {
      failed = true;
      return whole;
    }
    const double m = 0.5 * (a + b);
    const Panel left = kronrod15(f, a, m);
    const Panel right = kronrod15(f, m, b);
    evaluations += 30;
    const Panel l = run(a, m, left, 0.5 * tol, depth + 1);
    const Panel r = run(m, b, right, 0.5 * tol, depth + 1);
    return {l.value + r.value, l.error + r.error};
  }
};

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol, int max_depth) {
  if (a == b) return {};
  if (!(std::isfinite(a) && std::isfinite(b))) throw ParameterError("integration limits must be finite");
  const double sign = b > a ? 1.0 : -1.0;
  if (sign < 0) std::swap(a, b);
  const Panel whole = kronrod15(f, a, b);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole.value));
  Adaptive ad{f, abs_tol, max_depth};
  ad.evaluations = 15;
  const Panel result = ad.run(a, b, whole, tol, 0);
  const double final_tol = std::max(abs_tol, rel_tol * std::abs(result.value));
  if (ad.failed || !std::isfinite(result.value) || result.error > final_tol) {
    std::ostringstream msg;
    msg << "adaptive quadrature on [" << a << ", " << b << "] did not converge (error estimate "
        << result.error << ")";
    throw NumericalError(msg.str());
  }
  return {sign * result.value, result.error, ad.evaluations};
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw ParameterError("Gauss-Legendre rule needs n >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        const GaussRule& rule) {
  if (panels < 1) throw ParameterError("integrate_panels needs at least one panel");
  const double width = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + width * p;
    const double c = lo + 0.5 * width;
    double panel = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
      panel += rule.weights[j] * f(c + 0.5 * width * rule.nodes[j]);
    acc += 0.5 * width * panel;
  }
  return acc;
}

}  // namespace prandtl
