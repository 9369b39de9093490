#pragma once

#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "prandtl/grid.hpp"
#include "prandtl/quadrature.hpp"

namespace prandtl {

// (1/2) sqrt(3/pi) exp(-3 Y^2 / 4), a centred Gaussian with variance 2/3.
double rho(double Y);

// h_i(Y) = sum_j i!/(j!(i-2j)!) 3^{(i-2j)/2} (-1)^j Y^{i-2j}, eigenfunctions
// of L for the eigenvalues -1 + 3i/2.
double hermite(int i, double Y);
double hermite_derivative(int i, double Y);
double hermite_norm2(int i);  // ||h_i||^2 in L^2_rho over the whole line, 2^i i!
double eigenvalue(int i);     // -1 + 3i/2

class HermiteFrame {
 public:
  static constexpr int kMaxIndex = 40;

  explicit HermiteFrame(double Y0 = -std::numeric_limits<double>::infinity(), double Y_cut = 12.0,
                        double panel_width = 0.5, int n_quad = 16, int max_index = 12);

  double Y0() const { return Y0_; }
  double Y_cut() const { return Y_cut_; }
  int n_quad() const { return n_quad_; }
  int max_index() const { return max_index_; }
  double panel_width() const { return panel_width_; }
  double lower() const;  // max(Y0, -Y_cut)

  // int f rho over [lower, Y_cut], panels split at the given break points.
  double integrate(const std::function<double(double)>& f,
                   std::span<const double> breaks = {}) const;
  double inner(const std::function<double(double)>& f, const std::function<double(double)>& g,
               std::span<const double> breaks = {}) const;
  double basis(int i, double Y) const;  // hermite() with the index bound checked

 private:
  double Y0_;
  double Y_cut_;
  double panel_width_;
  int n_quad_;
  int max_index_;
  GaussRule rule_;
};

// Simpson quadrature of f g rho over the part of the common grid inside
// [Y0, Y_cut]. Fields on different grids raise ParameterError.
double inner_product_rho(const Field& f, const Field& g,
                         double Y0 = -std::numeric_limits<double>::infinity(),
                         double Y_cut = 12.0);

// L eps = -eps + (3/2) Y eps' - eps''.
Field apply_L(const Field& eps);

// eps minus its L^2_rho projection on h_0, h_1, h_2 (discrete Gram solve, so
// the output is orthogonal in the discrete inner product).
Field project_off_low_modes(const Field& eps);

// Components <eps, h_i>_rho for i = 0..n-1.
std::vector<double> low_mode_components(const Field& eps, int n = 3);

struct InequalitySides {
  double lhs;
  double rhs;
  bool holds(double rel_tol = 1e-9) const { return lhs <= rhs * (1.0 + rel_tol) + 1e-300; }
};

// lhs = int Y^2 eps^2 e^{-Y^2/4}, rhs = 4 int eps^2 e^{-Y^2/4} + 16 int eps'^2 e^{-Y^2/4}.
// A field on a half-line [0, ...) is reflected evenly.
InequalitySides poincare_check(const Field& eps);

// {||d eps||^2_rho, (9/2) ||eps||^2_rho}; eps should be projected already.
// Returned so that lhs >= rhs is the expected relation.
struct GapSides {
  double gradient;
  double scaled_mass;
  bool holds(double rel_tol = 1e-6) const { return gradient >= scaled_mass * (1.0 - rel_tol); }
};
GapSides spectral_gap_check(const Field& eps_bar);

// Relative eigen-residual ||L h_i - (-1 + 3i/2) h_i||_rho / ||h_i||_rho on
// a uniform grid over [-half_width, half_width] with the given spacing.
double eigen_residual(int i, double half_width = 6.0, double spacing = 1e-3);

}  // namespace prandtl
