#include "singpara/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "singpara/errors.hpp"
#include "singpara/flux.hpp"
#include "singpara/truncations.hpp"

namespace singpara {

double Box::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= side(a);
  return v;
}

double Box::distance_to_boundary(const Point& x) const {
  double d = std::min(x[0] - lo[0], hi[0] - x[0]);
  if (dim == 2) d = std::min({d, x[1] - lo[1], hi[1] - x[1]});
  return d;
}

bool Box::contains(const Point& x) const {
  for (int a = 0; a < dim; ++a) {
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  }
  return true;
}

Grid::Grid(const Box& box, double horizon, int nodes_per_axis, int time_steps)
    : box_(box), horizon_(horizon), nodes_per_axis_(nodes_per_axis), time_steps_(time_steps) {
  if (box.dim != 1 && box.dim != 2) throw GridError("grid dimension must be 1 or 2");
  if (nodes_per_axis < 3) throw GridError("need at least 3 nodes per axis");
  if (time_steps < 1) throw GridError("need at least one time step");
  if (!(horizon > 0.0)) throw GridError("horizon T must be positive");
  for (int a = 0; a < box.dim; ++a) {
    if (!(box.side(a) > 0.0)) throw GridError("degenerate box: side " + std::to_string(a));
  }
  if (box.dim == 2 && std::abs(box.side(0) - box.side(1)) > 1e-12 * box.side(0)) {
    throw GridError("uniform spacing requires a square box in 2D");
  }

  const int n = nodes_per_axis;
  spacing_ = box.side(0) / (n - 1);
  dt_ = horizon / time_steps;
  cell_volume_ = box.dim == 1 ? spacing_ : spacing_ * spacing_;
  node_count_ = box.dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;

  boundary_flag_.assign(node_count_, 0);
  weights_.assign(node_count_, 0.0);
  auto w1 = [&](int i) { return (i == 0 || i == n - 1) ? 0.5 * spacing_ : spacing_; };
  for (std::size_t node = 0; node < node_count_; ++node) {
    const auto [i, j] = multi_index(node);
    bool on_boundary = i == 0 || i == n - 1;
    double w = w1(i);
    if (box.dim == 2) {
      on_boundary = on_boundary || j == 0 || j == n - 1;
      w *= w1(j);
    }
    boundary_flag_[node] = on_boundary ? 1 : 0;
    weights_[node] = w;
    (on_boundary ? boundary_ : interior_).push_back(node);
  }
  build_edges();
}

std::array<int, 2> Grid::multi_index(std::size_t node) const {
  const auto n = static_cast<std::size_t>(nodes_per_axis_);
  return {static_cast<int>(node % n), static_cast<int>(node / n)};
}

Point Grid::coordinate(std::size_t node) const {
  const auto [i, j] = multi_index(node);
  Point x{box_.lo[0] + i * spacing_, 0.0};
  if (box_.dim == 2) x[1] = box_.lo[1] + j * spacing_;
  return x;
}

bool Grid::same_shape(const Grid& other) const {
  return box_.dim == other.box_.dim && nodes_per_axis_ == other.nodes_per_axis_ &&
         time_steps_ == other.time_steps_ && box_.lo == other.box_.lo && box_.hi == other.box_.hi &&
         horizon_ == other.horizon_;
}

void Grid::build_edges() {
  const int n = nodes_per_axis_;
  const double h = spacing_;
  if (box_.dim == 1) {
    edges_.reserve(static_cast<std::size_t>(n - 1));
    for (int i = 0; i + 1 < n; ++i) {
      Edge e;
      e.axis = 0;
      e.lo = index(i);
      e.hi = index(i + 1);
      e.midpoint = {box_.lo[0] + (i + 0.5) * h, 0.0};
      e.energy_weight = h;
      e.touches_interior = !is_boundary(e.lo) || !is_boundary(e.hi);
      edges_.push_back(e);
    }
    return;
  }

  auto trap = [&](int j) { return (j == 0 || j == n - 1) ? 0.5 * h : h; };
  edges_.reserve(static_cast<std::size_t>(2 * (n - 1) * n));
  for (int axis = 0; axis < 2; ++axis) {
    for (int j = 0; j < n; ++j) {       // transverse index
      for (int i = 0; i + 1 < n; ++i) {  // axial index
        auto node = [&](int axial, int transverse) {
          return axis == 0 ? index(axial, transverse) : index(transverse, axial);
        };
        Edge e;
        e.axis = axis;
        e.lo = node(i, j);
        e.hi = node(i + 1, j);
        const Point xl = coordinate(e.lo);
        e.midpoint = xl;
        e.midpoint[axis] += 0.5 * h;
        e.energy_weight = 0.5 * h * trap(j);
        e.touches_interior = !is_boundary(e.lo) || !is_boundary(e.hi);

        // Transverse differences at both axial endpoints.
        std::array<std::pair<std::size_t, std::size_t>, 4> diffs{};
        int count = 0;
        for (int a : {i, i + 1}) {
          if (j + 1 < n) diffs[count++] = {node(a, j + 1), node(a, j)};
          if (j - 1 >= 0) diffs[count++] = {node(a, j), node(a, j - 1)};
        }
        const double c = 1.0 / (count * h);
        for (int d = 0; d < count; ++d) {
          e.transverse_nodes[e.transverse_count] = diffs[d].first;
          e.transverse_coefficients[e.transverse_count++] = c;
          e.transverse_nodes[e.transverse_count] = diffs[d].second;
          e.transverse_coefficients[e.transverse_count++] = -c;
        }
        edges_.push_back(e);
      }
    }
  }
}

Grid build_grid(const Box& box, double horizon, int nodes_per_axis, int time_steps) {
  return Grid(box, horizon, nodes_per_axis, time_steps);
}

GridFunction::GridFunction(std::size_t node_count, int slice_count, double fill)
    : node_count_(node_count),
      slice_count_(slice_count),
      values_(node_count * static_cast<std::size_t>(slice_count), fill) {}

GridFunction GridFunction::zeros(const Grid& grid) {
  return GridFunction(grid.node_count(), grid.time_steps() + 1, 0.0);
}

bool GridFunction::matches(const Grid& grid) const {
  return node_count_ == grid.node_count() && slice_count_ == grid.time_steps() + 1;
}

std::span<double> GridFunction::slice(int m) {
  return std::span<double>(values_).subspan(offset(m), node_count_);
}

std::span<const double> GridFunction::slice(int m) const {
  return std::span<const double>(values_).subspan(offset(m), node_count_);
}

GridFunction sample(const Grid& grid, const SpaceTimeFunction& g) {
  GridFunction out = GridFunction::zeros(grid);
  for (int m = 0; m <= grid.time_steps(); ++m) {
    const double t = grid.time(m);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      out.at(m, node) = g(grid.coordinate(node), t);
    }
  }
  return out;
}

double integrate_space(const Grid& grid, std::span<const double> slice) {
  const auto w = grid.weights();
  double s = 0.0;
  for (std::size_t node = 0; node < slice.size(); ++node) s += w[node] * slice[node];
  return s;
}

double integrate_space_time(const Grid& grid, const GridFunction& g) {
  double s = 0.0;
  for (int m = 1; m <= grid.time_steps(); ++m) s += integrate_space(grid, g.slice(m));
  return grid.dt() * s;
}

double integrate_space_time(const Grid& grid, const GridFunction& g, const SpaceTimeFunction& phi) {
  const auto w = grid.weights();
  double s = 0.0;
  for (int m = 1; m <= grid.time_steps(); ++m) {
    const double t = grid.time(m);
    const auto values = g.slice(m);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      if (values[node] == 0.0) continue;
      s += w[node] * values[node] * phi(grid.coordinate(node), t);
    }
  }
  return grid.dt() * s;
}

Vector edge_gradient(const Grid& grid, const Edge& edge, std::span<const double> slice) {
  Vector g{0.0, 0.0};
  g[edge.axis] = (slice[edge.hi] - slice[edge.lo]) / grid.spacing();
  if (edge.transverse_count > 0) {
    double tr = 0.0;
    for (int k = 0; k < edge.transverse_count; ++k) {
      tr += edge.transverse_coefficients[k] * slice[edge.transverse_nodes[k]];
    }
    g[1 - edge.axis] = tr;
  }
  return g;
}

std::vector<Vector> discrete_gradient(const Grid& grid, std::span<const double> slice) {
  std::vector<Vector> out;
  out.reserve(grid.edges().size());
  for (const Edge& e : grid.edges()) out.push_back(edge_gradient(grid, e, slice));
  return out;
}

std::vector<double> flux_divergence(const Grid& grid, const Flux& flux,
                                    std::span<const double> slice, double t) {
  std::vector<double> out(grid.node_count(), 0.0);
  const double inv_h = 1.0 / grid.spacing();
  for (const Edge& e : grid.edges()) {
    if (!e.touches_interior) continue;
    const Vector a = flux.value(e.midpoint, t, edge_gradient(grid, e, slice), grid.dim());
    const double normal = a[e.axis] * inv_h;
    if (!grid.is_boundary(e.lo)) out[e.lo] -= normal;
    if (!grid.is_boundary(e.hi)) out[e.hi] += normal;
  }
  return out;
}

double flux_pairing(const Grid& grid, const Flux& flux, std::span<const double> u,
                    std::span<const double> psi, double t) {
  double s = 0.0;
  for (const Edge& e : grid.edges()) {
    if (!e.touches_interior) continue;
    const double dpsi = psi[e.hi] - psi[e.lo];
    if (dpsi == 0.0) continue;
    const Vector a = flux.value(e.midpoint, t, edge_gradient(grid, e, u), grid.dim());
    s += a[e.axis] * dpsi;
  }
  return s * grid.cell_volume() / grid.spacing();
}

namespace {

// Exact integral of the linear interpolant over [a, b] restricted to one axis.
double integrate_interpolant_1d(const Grid& grid, std::span<const double> v, double a, double b) {
  const double h = grid.spacing();
  const double x0 = grid.box().lo[0];
  const int n = grid.nodes_per_axis();
  double s = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double xl = x0 + i * h;
    const double lo = std::max(a, xl);
    const double hi = std::min(b, xl + h);
    if (hi <= lo) continue;
    const double xm = 0.5 * (lo + hi);
    const double theta = (xm - xl) / h;
    s += (hi - lo) * ((1.0 - theta) * v[i] + theta * v[i + 1]);
  }
  return s;
}

double integrate_interpolant_2d(const Grid& grid, std::span<const double> v, const Point& a,
                                const Point& b) {
  const double h = grid.spacing();
  const Point o = grid.box().lo;
  const int n = grid.nodes_per_axis();
  double s = 0.0;
  for (int j = 0; j + 1 < n; ++j) {
    const double yl = o[1] + j * h;
    const double ylo = std::max(a[1], yl);
    const double yhi = std::min(b[1], yl + h);
    if (yhi <= ylo) continue;
    const double ty = (0.5 * (ylo + yhi) - yl) / h;
    for (int i = 0; i + 1 < n; ++i) {
      const double xl = o[0] + i * h;
      const double xlo = std::max(a[0], xl);
      const double xhi = std::min(b[0], xl + h);
      if (xhi <= xlo) continue;
      const double tx = (0.5 * (xlo + xhi) - xl) / h;
      // The bilinear interpolant integrates to area times its centre value.
      const double centre = (1.0 - tx) * (1.0 - ty) * v[grid.index(i, j)] +
                            tx * (1.0 - ty) * v[grid.index(i + 1, j)] +
                            (1.0 - tx) * ty * v[grid.index(i, j + 1)] +
                            tx * ty * v[grid.index(i + 1, j + 1)];
      s += (xhi - xlo) * (yhi - ylo) * centre;
    }
  }
  return s;
}

}  // namespace

double integrate_interpolant(const Grid& grid, std::span<const double> values, const Point& lo,
                             const Point& hi) {
  if (grid.dim() == 1) return integrate_interpolant_1d(grid, values, lo[0], hi[0]);
  return integrate_interpolant_2d(grid, values, lo, hi);
}

double boundary_strip_mass(const Grid& grid, std::span<const double> slice, double k, double eps) {
  if (!(eps > grid.spacing())) {
    throw GridError("boundary strip of width " + std::to_string(eps) +
                    " is not resolved by spacing " + std::to_string(grid.spacing()));
  }
  std::vector<double> tk(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) tk[i] = truncate(k, slice[i]);

  const Box& box = grid.box();
  const double total = integrate_interpolant(grid, tk, box.lo, box.hi);
  Point inner_lo = box.lo;
  Point inner_hi = box.hi;
  bool inner_empty = false;
  for (int a = 0; a < box.dim; ++a) {
    inner_lo[a] += eps;
    inner_hi[a] -= eps;
    if (inner_hi[a] <= inner_lo[a]) inner_empty = true;
  }
  const double inner = inner_empty ? 0.0 : integrate_interpolant(grid, tk, inner_lo, inner_hi);
  return (total - inner) / eps;
}

CutoffFunction::CutoffFunction(int dim, const Point& center, double radius, double horizon,
                               double temporal_margin, int id)
    : dim_(dim),
      center_(center),
      radius_(radius),
      horizon_(horizon),
      margin_(temporal_margin),
      id_(id) {}

double CutoffFunction::spatial(const Point& x) const {
  double r2 = 0.0;
  for (int a = 0; a < dim_; ++a) r2 += (x[a] - center_[a]) * (x[a] - center_[a]);
  const double q = 1.0 - r2 / (radius_ * radius_);
  return q > 0.0 ? q * q : 0.0;
}

bool CutoffFunction::supports(const Point& x) const { return spatial(x) > 0.0; }

double CutoffFunction::temporal(double t) const {
  const double s = (t - (horizon_ - margin_)) / margin_;
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

double CutoffFunction::temporal_derivative(double t) const {
  const double s = (t - (horizon_ - margin_)) / margin_;
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return -6.0 * s * (1.0 - s) / margin_;
}

double CutoffFunction::value(const Point& x, double t) const { return spatial(x) * temporal(t); }

Vector CutoffFunction::gradient(const Point& x, double t) const {
  double r2 = 0.0;
  for (int a = 0; a < dim_; ++a) r2 += (x[a] - center_[a]) * (x[a] - center_[a]);
  const double q = 1.0 - r2 / (radius_ * radius_);
  Vector g{0.0, 0.0};
  if (q <= 0.0) return g;
  const double factor = -4.0 * q / (radius_ * radius_) * temporal(t);
  for (int a = 0; a < dim_; ++a) g[a] = factor * (x[a] - center_[a]);
  return g;
}

double CutoffFunction::time_derivative(const Point& x, double t) const {
  return spatial(x) * temporal_derivative(t);
}

CutoffFunction bump_cutoff(const Grid& grid, const Point& center, double radius,
                           double temporal_margin, int id) {
  if (!(radius > 0.0)) throw GridError("cut-off radius must be positive");
  if (!(temporal_margin > 0.0) || temporal_margin > grid.horizon()) {
    throw GridError("temporal margin must lie in (0, T]");
  }
  if (!(grid.box().distance_to_boundary(center) - radius > 0.0)) {
    throw GridError("cut-off support touches the boundary");
  }
  return CutoffFunction(grid.dim(), center, radius, grid.horizon(), temporal_margin, id);
}

std::vector<CutoffFunction> cutoff_panel(const Grid& grid) {
  const Box& box = grid.box();
  const double side = box.side(0);
  const double h = grid.spacing();
  const double margin = 0.25 * grid.horizon();
  auto at = [&](double fx, double fy) {
    Point c{box.lo[0] + fx * side, 0.0};
    if (box.dim == 2) c[1] = box.lo[1] + fy * side;
    return c;
  };
  const double near_radius = 0.2 * side - 2.0 * h;
  if (!(near_radius > 0.0)) throw GridError("grid too coarse for the cut-off panel");
  std::vector<CutoffFunction> panel;
  panel.push_back(bump_cutoff(grid, at(0.5, 0.5), 0.35 * side, margin, 0));
  panel.push_back(bump_cutoff(grid, at(0.3, 0.6), 0.2 * side, margin, 1));
  panel.push_back(bump_cutoff(grid, at(0.2, 0.5), near_radius, margin, 2));
  return panel;
}

}  // namespace singpara
