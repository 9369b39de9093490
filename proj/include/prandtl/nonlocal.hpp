#pragma once

#include <span>
#include <vector>

#include "prandtl/grid.hpp"

namespace prandtl {

// Series k^{(-i)}(y) = sum_n y^{n+i} / (n! (n+i)!), with k^{(0)} = k the
// Green kernel of u_t = int_0^x u. Above log_space_from the terms are summed
// in log space; values beyond the double range come back as +inf.
struct KernelEvaluator {
  double tol = 1e-15;
  int max_terms = 100000;
  double log_space_from = 100.0;

  double operator()(double y) const { return primitive(0, y); }
  double primitive(int i, double y) const;
  // k'(y) = sum_n y^n / (n! (n+1)!)
  double derivative(double y) const;
  // log k^{(-i)}(y) for y > 0.
  double log_primitive(int i, double y) const;
};

double kernel(double y);
double kernel_primitive(int i, double y);
double kernel_derivative(double y);

// |y k'(y) - k^{(-1)}(y)|
double kernel_ode_check(double y);

// u(t,x) = u0(0) k(t x) + int_0^x u0'(y) k(t (x - y)) dy, evaluated in the
// integrated-by-parts form u0(x) + t int_0^x u0(y) k'(t (x - y)) dy at the
// nodes of x_grid (inside u0's domain).
Field green_solution(const Field& u0, double t, const GridPtr& x_grid);

struct NonlocalState {
  double t = 0.0;
  Field u;
};

// Midpoint RK2 step of u_t = int_0^x u with trapezoid primitives.
NonlocalState direct_step_nonlocal(const NonlocalState& state, double dt);

// Steps from t = 0 to t_end with at most dt per step.
Field direct_solve_nonlocal(const Field& u0, double t_end, double dt);

// Solution of v_t - int_0^x v + x v_x = 0 with v(0) = v0:
// v(t,x) = u(e^t, x e^{-t}) where u(1,.) = v0.
Field transported_solution(const Field& v0, double t);

struct DecayFit {
  std::vector<double> times;
  std::vector<double> sup_compact;
  double slope = 0.0;
  double r2 = 0.0;
};

// sup_{0<=x<=L} |v(t,x)| over the given times and the log-linear slope.
DecayFit compact_decay(const Field& v0, double L, std::span<const double> times);

}  // namespace prandtl
