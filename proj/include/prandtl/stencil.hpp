#pragma once

#include <span>
#include <vector>

namespace prandtl {

// Finite-difference weights (Fornberg) for the derivative of the given order
// at x0 from samples at the points in `x`.
std::vector<double> stencil_weights(double x0, std::span<const double> x, int order);

}  // namespace prandtl
