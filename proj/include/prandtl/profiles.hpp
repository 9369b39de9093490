#pragma once

#include <cstddef>
#include <vector>

#include "prandtl/grid.hpp"

namespace prandtl {

// cos^2(Z/2) on [-pi, pi], zero outside.
double g1_exact(double Z);

// a_k = pi / sin(pi/(2k)), the limit of Z as the profile parameter tends to
// infinity.
double support_half_width(int k);

// pi / (2k sin(pi/(2k))), the value printed in the statement of the
// proposition. Reported next to the derived value, never used.
double support_half_width_statement(int k);

// Statement-side constants, reported alongside the derived ones.
double center_coeff_statement(int k);  // 1
double edge_coeff_statement(int k);    // (2k-1)^(1 + 1/(2k-1))

// Tabulated G_k on Z in [0, a_k - tol], parametrized by u = xi^(1/(2k)):
//   Z(u) = int_0^u 2k/(1+v^{2k}) dv,  G = 1/(1+u^{2k}),  dG/dZ = -u^{2k-1} G.
struct ProfileTable {
  int k = 1;
  double a_k = 0.0;
  double tol = 0.0;
  double z_mid = 0.0;  // Z(1), start of the tail branch
  std::vector<double> u_samples;
  std::vector<double> Z_samples;
  std::vector<double> G_samples;
  std::vector<double> dG_samples;
  double center_coeff = 0.0;
  double edge_coeff = 0.0;
  double edge_exponent = 0.0;

  // Even extension, zero outside [-a_k, a_k]; edge asymptotics beyond the
  // last sample.
  double value(double Z) const;
  double derivative(double Z) const;
  // 1 - G, computed without cancellation near Z = 0.
  double deficit(double Z) const;
};

ProfileTable build_profile(int k, std::size_t n = 4001, double tol = 1e-10);

// Trapezoid integral of G over [0, a_k] (table samples plus the edge tail).
double profile_mass(const ProfileTable& table);

// sup over |Z| <= (1 - delta) a_k of
//   F - F^2 + (-(1 - 1/(2k)) Z + int_0^Z F) dF/dZ
// from the tabulated F, dF and a trapezoid primitive.
double profile_residual(const ProfileTable& table, double delta = 0.05);

// Same equation for an arbitrary field on a Z grid containing 0; dF and the
// primitive from the grid module. The sup is taken over |Z| <= z_window.
double profile_residual(const Field& F, int k, double z_window);

// Pointwise residual field of the same equation.
Field profile_residual_field(const Field& F, int k);

struct AsymptoticFit {
  double center_exponent = 0.0;
  double center_coeff = 0.0;
  double edge_exponent = 0.0;
  double edge_coeff = 0.0;
};

// Log-log fits of 1 - G on Z in [1e-3, 1e-2] and of G against a_k - Z on
// a_k - Z in [1e-4, 1e-2].
AsymptoticFit fit_asymptotics(const ProfileTable& table);

struct GlueSegment {
  enum class Kind { plateau, bump };
  Kind kind = Kind::plateau;
  double value = 0.0;   // plateau value, 0 or 1
  double length = 0.0;  // plateau length
  int k = 1;            // bump order
  double mu = 1.0;      // bump scale

  static GlueSegment plateau(double value, double length);
  static GlueSegment bump(int k, double mu);
};

using GlueSpec = std::vector<GlueSegment>;

// Lays the segments out from grid.front(). A bump runs from the value at its
// left junction to the value at its right junction: 0 -> 0 is a full bump of
// length 2 a_k mu, 1 -> 0 the descending half and 0 -> 1 the ascending half.
// Beyond the last segment the last value is continued. Adjacent plateaus
// with different values, or a bump between two 1 values, raise
// GlueSpecError.
Field glue(const GlueSpec& spec, const GridPtr& grid);

// Positions of the junctions produced by glue().
std::vector<double> glue_junctions(const GlueSpec& spec, double start);

// psi(t, y) = (T - t)^{-1} G_k((y - y*(t)) (T - t)^{1 - 1/(2k)} / mu) with
// y*(t) = mu a_k (T - t)^{-(1 - 1/(2k))} + y0.
double self_similar_profile(const ProfileTable& table, double mu, double T, double y0, double t,
                            double y);

// sup of psi_t - psi^2 + (int_{-inf}^y psi) psi_y over the inner part of the
// support, psi_t by centred differences with step dt and the spatial terms
// from the grid module. The grid must start at or left of y0.
double self_similar_residual(const ProfileTable& table, double mu, double T, double t,
                             const GridPtr& grid, double y0 = 0.0, double dt = 1e-6,
                             double inner_fraction = 0.9);

}  // namespace prandtl
