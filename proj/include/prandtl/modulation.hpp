#pragma once

#include <array>
#include <span>
#include <vector>

#include "prandtl/grid.hpp"
#include "prandtl/solver.hpp"

namespace prandtl {

struct ModulationState {
  double s = 0.0;
  double t = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double a = 0.0;
  double y_star = 0.0;
  double newton_residual = 0.0;
};

// Parabolic frame Y = lambda (y - y*), f = xi / lambda^2 on a uniform grid over
// [max(-lambda y*, -Y_cut), Y_cut].
struct ParabolicFrame {
  Field f;
  double lambda;
  double y_star;
  double s;
};

// Profile frame Z = (y - y*)/(lambda mu), F = xi / lambda^2 and u = F - G_1.
struct ProfileFrame {
  Field F;
  Field u;
  double lambda;
  double mu;
  double y_star;
};

ParabolicFrame to_parabolic_frame(const Field& xi, double lambda, double y_star, double s,
                                  double Y_cut = 12.0, double spacing = 0.01);

ProfileFrame to_profile_frame(const Field& xi, double lambda, double mu, double y_star,
                              const GridPtr& z_grid);

// Frame-level unknowns of the decomposition
//   f(Y + shift) = lambda^2 G_1(Y / (lambda^2 mu)) + eps(Y),  eps _|_ h_0, h_1, h_2.
struct DecomposeGuess {
  double lambda = 1.0;
  double mu = 1.0;
  double shift = 0.0;
};

struct DecomposeOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  double fd_step = 1e-6;
  double Y_cut = 12.0;
  double panel_width = 0.25;
  int n_quad = 16;
};

struct DecomposeResult {
  double lambda;
  double mu;
  double shift;
  double c2;  // 1/(lambda^2 mu)^2, the Newton unknown replacing mu
  double residual;
  int iterations;
  std::array<double, 3> orthogonality;
  Field eps;  // on the input grid
};

// Damped Newton on (lambda, c^2, shift) with a forward-difference Jacobian.
// G_1(cY) is continued analytically through c^2 = 0 (cosh branch) so the
// iteration may cross it. f is read through a natural cubic spline; the
// physical boundary is the left end of the grid of f.
DecomposeResult decompose(const Field& f, const DecomposeGuess& guess,
                          const DecomposeOptions& options = {});

// lambda^2 (1 + cos(sqrt(c2) Y))/2 with support |sqrt(c2) Y| <= pi, and the
// cosh continuation for c2 < 0.
double scaled_g1(double lambda, double c2, double Y);

// Physical parameters of a snapshot: two decompositions, the second in the
// frame re-centred on the first result.
ModulationState extract_state(const SolverState& snapshot, double s,
                              const DecomposeOptions& options = {});

struct TrackOptions {
  DecomposeOptions decompose;
  double s0 = 0.0;  // 0 selects 2 log lambda(t_0)
};

// Chains extract_state over time-ordered snapshots. s advances by the
// integral of lambda^2 dt, exact when lambda^{-2} is linear in t between
// snapshots.
std::vector<ModulationState> track(std::span<const SolverState> snapshots,
                                   const TrackOptions& options = {});

// Integral of lambda^2 over [t0, t1] for lambda^{-2} linear in t.
double lambda_squared_integral(double t0, double lambda0, double t1, double lambda1);

struct ModulationResidual {
  double s;
  double r_lambda;
  double r_mu;
};

// r_lambda = lambda_s/lambda - 1/2 + 1/(4 lambda^4 mu^2),
// r_mu = mu_s/mu - 1/(2 lambda^4 mu^2); derivatives in s from three-point
// nonuniform stencils (one-sided at the ends).
std::vector<ModulationResidual> modulation_residuals(std::span<const ModulationState> states);

// Mean |r_mu| over the first and last thirds of the series.
struct ThirdsDecay {
  double first;
  double last;
  double ratio;  // first / last
};
ThirdsDecay r_mu_decay(std::span<const ModulationResidual> residuals);

// q(Z) = sin(|Z|/2) on [-pi, pi], 1 beyond.
double shape_q(double Z);

// Weight w(s, Z); RangeError at Z = 0, ParameterError for s < e.
double weight_w(double s, double Z);
double weight_w_ds(double s, double Z);

double vector_A(double Z);

// Transport, potential and eigenfunction of the exterior linearized operator.
double transport_T(double Z);
double potential_V(double Z);
double phi_beta(double beta, double Z);
double phi_beta_derivative(double beta, double Z);

// |V phi_beta + T phi_beta' - beta phi_beta|.
double local_operator_checks(double beta, double Z);

// H u = T u' + V u + (int_0^Z u) G_1' on a Z grid containing 0.
Field apply_H(const Field& u);

struct ExteriorNorms {
  double left_l2;    // int_{-pi-a}^{-M e^{-s}} u^2 w
  double right_l2;   // int_{M e^{-s}}^{inf} u^2 w
  double left_h1;    // same with |A u'|^2
  double right_h1;
};

ExteriorNorms exterior_norms(const Field& u, double s, double a, double M);

// Z grid for exterior norms: geometric clustering toward the cut-offs
// +-M e^{-s}, uniform beyond |Z| = pi.
GridPtr exterior_grid(double s, double a, double M, double z_max, double ratio = 1.01,
                      double outer_spacing = 0.01);

// Exterior norms of a snapshot decomposed into `state`.
ExteriorNorms snapshot_exterior_norms(const SolverState& snapshot, const ModulationState& state,
                                      double M);

struct FrameResidualOptions {
  double window = 5.0;
  double lambda_s_scale = 1.0;  // sensitivity probe: multiplies lambda_s
  double spacing = 0.01;
};

struct FrameResidual {
  double residual;       // sup |R| / largest term
  double raw;            // sup |R|
  double largest_term;
};

// Residual of the parabolic-frame equation at the middle of three
// consecutive slices.
FrameResidual frame_residual(std::span<const SolverState> slices,
                             std::span<const ModulationState> states,
                             const FrameResidualOptions& options = {});

struct TrappedOptions {
  double K = 100.0;
  double M = 20.0;
  double nu = 0.01;
};

struct TrappedCheck {
  double s;
  bool lambda_ok;
  bool mu_ok;
  bool a_ok;
  bool l2_ok;   // exterior u^2 w bound
  bool h1_ok;   // exterior |A u'|^2 w bound
  double scaled_l2;  // e^{(1-2 nu) s} (left_l2 + right_l2)
  bool all() const { return lambda_ok && mu_ok && a_ok && l2_ok && h1_ok; }
};

TrappedCheck trapped_check(const ModulationState& state, const ExteriorNorms& norms,
                           const TrappedOptions& options = {});

}  // namespace prandtl
