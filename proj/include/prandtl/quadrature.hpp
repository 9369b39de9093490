#pragma once

#include <functional>
#include <vector>

namespace prandtl {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

// Adaptive Gauss-Kronrod (7/15) on a finite interval. Throws NumericalError
// when the error estimate does not reach max(abs_tol, rel_tol*|value|)
// within max_depth bisections.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol = 1e-13, double rel_tol = 1e-13,
                                    int max_depth = 40);

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
GaussRule gauss_legendre(int n);

// Composite Gauss-Legendre over equal panels of [a, b].
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        const GaussRule& rule);

}  // namespace prandtl
