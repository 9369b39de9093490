#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace prandtl {

// Strictly increasing 1D mesh. The simulation mesh starts at y = 0; meshes
// reused for the parabolic (Y) and profile (Z) frames may start anywhere.
class Grid {
 public:
  static constexpr std::size_t kMinNodes = 8;

  explicit Grid(std::vector<double> nodes);

  std::span<const double> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double front() const { return nodes_.front(); }
  double back() const { return nodes_.back(); }
  double y_max() const { return nodes_.back(); }
  double spacing(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }

  // Index i with nodes[i] <= x < nodes[i+1], clamped to [0, size-2].
  std::size_t locate(double x) const;

  bool operator==(const Grid& other) const { return nodes_ == other.nodes_; }

 private:
  std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const Grid>;

// Samples on a shared, immutable grid. Values must be finite.
class Field {
 public:
  Field(GridPtr grid, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double node(std::size_t i) const { return (*grid_)[i]; }

  double max_value() const;
  std::size_t argmax() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

template <class F>
Field sample(const GridPtr& grid, F&& f) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*grid)[i]);
  return Field(grid, std::move(v));
}

// Mesh on [0, y_max] with n nodes whose spacing grows geometrically, with
// ratio `stretch` between neighbouring cells, away from `focus`. stretch = 1
// gives a uniform mesh.
GridPtr build_grid(double y_max, std::size_t n, double stretch, double focus);

GridPtr uniform_grid(double lo, double hi, std::size_t n);

// First or second derivative. Three-point stencils inside, second-order
// one-sided stencils at the two ends.
Field derivative(const Field& field, int order);

// Trapezoid primitive from the left end: result[0] = 0.
Field cumulative_integral(const Field& field);

// Trapezoid integral over the whole grid.
double integrate(const Field& field);

// Composite Simpson (piecewise quadratic) integral, fourth order on smooth
// data and nonuniform meshes.
double integrate_simpson(std::span<const double> x, std::span<const double> y);
double integrate_simpson(const Field& field);

enum class Interpolation {
  monotone_cubic,  // Hermite cubic, fourth-order slopes, Hyman filter
  cubic_spline,    // natural C2 spline, no monotonicity constraint
  linear,
};

// Evaluates the interpolant at arbitrary points inside [front, back].
// Points outside raise RangeError.
std::vector<double> interpolate_at(const Field& field, std::span<const double> points,
                                   Interpolation method = Interpolation::monotone_cubic);

Field interpolate(const Field& field, const GridPtr& targets,
                  Interpolation method = Interpolation::monotone_cubic);

struct RemeshOptions {
  std::size_t n = 0;  // 0 keeps the node count of the input
  double stretch = 1.0;
  double threshold = 1e-8;
  double boundary_band = 0.02;  // fraction of the domain checked at the right end
};

// Rebuilds the mesh around new_focus on [0, new_y_max], interpolating the
// field and padding with zeros beyond the old domain. Throws
// DomainTruncationError when |field| exceeds the threshold near the old right
// boundary.
Field remesh(const Field& field, double new_focus, double new_y_max,
             const RemeshOptions& options = {});

// Max of |field| over the last `band` fraction of the domain.
double boundary_magnitude(const Field& field, double band);

}  // namespace prandtl
