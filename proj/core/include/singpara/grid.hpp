#pragma once

/// @file grid.hpp
/// @brief Uniform tensor grids on a box times (0, T), quadrature, edge
/// gradients, the conservative flux divergence and boundary strips.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace singpara {

class Flux;

/// Spatial point; component 1 is unused in one dimension.
using Point = std::array<double, 2>;
/// Spatial vector (gradients, fluxes); component 1 is unused in 1D.
using Vector = std::array<double, 2>;

/// Axis-aligned spatial rectangle in dimension 1 or 2.
struct Box {
  int dim = 1;
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};

  double side(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;
  /// Distance from x to the boundary of the box (closed form).
  double distance_to_boundary(const Point& x) const;
  bool contains(const Point& x) const;
};

/// One axis-aligned edge between two neighbouring nodes.
///
/// The edge gradient uses the axis difference quotient plus, in 2D, the
/// average of the neighbouring transverse difference quotients. The
/// transverse component is stored as a linear stencil over node values.
struct Edge {
  int axis = 0;
  std::size_t lo = 0;
  std::size_t hi = 0;
  Point midpoint{0.0, 0.0};
  /// Weight for edge quadrature of volume integrals such as |grad u|^p.
  double energy_weight = 0.0;
  /// True if at least one endpoint is an interior node.
  bool touches_interior = false;
  int transverse_count = 0;
  std::array<std::size_t, 8> transverse_nodes{};
  std::array<double, 8> transverse_coefficients{};
};

/// Uniform tensor grid of Omega x [0, T] with cached index sets.
class Grid {
 public:
  Grid(const Box& box, double horizon, int nodes_per_axis, int time_steps);

  int dim() const { return box_.dim; }
  const Box& box() const { return box_; }
  int nodes_per_axis() const { return nodes_per_axis_; }
  int time_steps() const { return time_steps_; }
  double spacing() const { return spacing_; }
  double dt() const { return dt_; }
  double horizon() const { return horizon_; }
  double time(int slice) const { return slice * dt_; }

  std::size_t node_count() const { return node_count_; }
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nodes_per_axis_) +
           static_cast<std::size_t>(i);
  }
  std::array<int, 2> multi_index(std::size_t node) const;
  Point coordinate(std::size_t node) const;
  bool is_boundary(std::size_t node) const { return boundary_flag_[node] != 0; }
  std::span<const std::size_t> interior() const { return interior_; }
  std::span<const std::size_t> boundary() const { return boundary_; }
  /// Trapezoid quadrature weights in space.
  std::span<const double> weights() const { return weights_; }
  /// Cell volume h^d; the quadrature weight of every interior node.
  double cell_volume() const { return cell_volume_; }
  std::span<const Edge> edges() const { return edges_; }

  /// True if both grids describe the same discretisation.
  bool same_shape(const Grid& other) const;

 private:
  void build_edges();

  Box box_;
  double horizon_;
  int nodes_per_axis_;
  int time_steps_;
  double spacing_;
  double dt_;
  double cell_volume_;
  std::size_t node_count_;
  std::vector<unsigned char> boundary_flag_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  std::vector<double> weights_;
  std::vector<Edge> edges_;
};

/// Builds a uniform grid; throws GridError on degenerate input.
Grid build_grid(const Box& box, double horizon, int nodes_per_axis, int time_steps);

/// Space-time nodal field: slice m holds the values at t_m = m dt.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::size_t node_count, int slice_count, double fill = 0.0);
  static GridFunction zeros(const Grid& grid);

  std::size_t node_count() const { return node_count_; }
  int slice_count() const { return slice_count_; }
  int time_steps() const { return slice_count_ - 1; }
  bool matches(const Grid& grid) const;

  std::span<double> slice(int m);
  std::span<const double> slice(int m) const;
  double& at(int m, std::size_t node) { return values_[offset(m) + node]; }
  double at(int m, std::size_t node) const { return values_[offset(m) + node]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  std::size_t offset(int m) const { return static_cast<std::size_t>(m) * node_count_; }

  std::size_t node_count_ = 0;
  int slice_count_ = 0;
  std::vector<double> values_;
};

/// Space-time test or data function evaluated at (x, t).
using SpaceTimeFunction = std::function<double(const Point&, double)>;

/// Samples g on every node and slice.
GridFunction sample(const Grid& grid, const SpaceTimeFunction& g);

/// Trapezoid rule in space.
double integrate_space(const Grid& grid, std::span<const double> slice);

/// Space-time quadrature: trapezoid in space, right-endpoint composite rule
/// in time (slices 1..M with weight dt). The initial slice is excluded; this
/// matches the implicit Euler source sampling.
double integrate_space_time(const Grid& grid, const GridFunction& g);

/// Space-time quadrature of the product g * phi.
double integrate_space_time(const Grid& grid, const GridFunction& g, const SpaceTimeFunction& phi);

/// Edge gradients of one slice, in the order of grid.edges().
std::vector<Vector> discrete_gradient(const Grid& grid, std::span<const double> slice);

/// Gradient on a single edge.
Vector edge_gradient(const Grid& grid, const Edge& edge, std::span<const double> slice);

/// Conservative assembly of -div a(x, t, grad u) at the interior nodes.
/// Boundary entries of the result are zero.
std::vector<double> flux_divergence(const Grid& grid, const Flux& flux,
                                    std::span<const double> slice, double t);

/// Discrete weak-form flux pairing sum_e h^d a_axis(grad_e u) * dpsi_e / h.
/// Equals sum_i h^d psi_i flux_divergence_i for interior-supported psi.
double flux_pairing(const Grid& grid, const Flux& flux, std::span<const double> u,
                    std::span<const double> psi, double t);

/// (1/eps) \int_{Omega_eps} T_k(u) of the piecewise (bi)linear interpolant.
/// Throws GridError if eps <= spacing.
double boundary_strip_mass(const Grid& grid, std::span<const double> slice, double k, double eps);

/// Exact integral of the piecewise (bi)linear interpolant of nodal values
/// over the sub-rectangle [lo, hi] of the box.
double integrate_interpolant(const Grid& grid, std::span<const double> values, const Point& lo,
                             const Point& hi);

/// Compactly supported C^1 test function phi(x, t) = B(x) tau(t).
///
/// B is the polynomial bump (1 - (r/R)^2)^2 with peak 1 at the centre; tau is
/// 1 on [0, T - margin] and decays with a cubic smoothstep to 0 at T.
class CutoffFunction {
 public:
  CutoffFunction(int dim, const Point& center, double radius, double horizon, double temporal_margin,
                 int id = 0);

  double value(const Point& x, double t) const;
  Vector gradient(const Point& x, double t) const;
  double time_derivative(const Point& x, double t) const;
  double spatial(const Point& x) const;
  double temporal(double t) const;
  double temporal_derivative(double t) const;

  int id() const { return id_; }
  const Point& center() const { return center_; }
  double radius() const { return radius_; }
  /// True if the spatial support contains x.
  bool supports(const Point& x) const;

 private:
  int dim_;
  Point center_;
  double radius_;
  double horizon_;
  double margin_;
  int id_;
};

/// Validated constructor: throws GridError if the support reaches the boundary.
CutoffFunction bump_cutoff(const Grid& grid, const Point& center, double radius,
                           double temporal_margin, int id = 0);

/// Fixed panel of three cut-offs: centred large radius, off-centre, and
/// near-boundary with a support clearing the boundary by two spacings.
std::vector<CutoffFunction> cutoff_panel(const Grid& grid);

}  // namespace singpara
