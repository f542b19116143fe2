#pragma once

/// @file measures.hpp
/// @brief Nonnegative bounded measures on Q as atoms plus density, their
/// mollification on a grid, and narrow-convergence diagnostics.

#include <optional>
#include <vector>

#include "singpara/grid.hpp"

namespace singpara {

/// Point mass at (x, t) in the open cylinder.
struct Atom {
  Point x{0.0, 0.0};
  double t = 0.0;
  double mass = 0.0;
};

/// Absolutely continuous part: a nonnegative density and its total mass.
struct Density {
  SpaceTimeFunction value;
  double mass = 0.0;
};

class RadonMeasure {
 public:
  RadonMeasure() = default;
  RadonMeasure(const Box& box, double horizon);

  /// Throws ParameterError for nonpositive mass and DomainError for atoms
  /// outside the open cylinder.
  void add_atom(const Point& x, double t, double mass);
  /// Adds a density; its mass is computed by quadrature on `grid`.
  void set_density(SpaceTimeFunction density, const Grid& grid);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<Density>& density() const { return density_; }
  bool empty() const { return atoms_.empty() && !density_; }
  double total_variation() const { return total_variation_; }

  /// Recomputes the total variation with the density integrated on `grid`.
  double recompute_total_variation(const Grid& grid) const;

 private:
  Box box_;
  double horizon_ = 1.0;
  std::vector<Atom> atoms_;
  std::optional<Density> density_;
  double total_variation_ = 0.0;
};

/// \int_Q phi d mu: exact on atoms, grid quadrature on the density.
double pair(const RadonMeasure& mu, const SpaceTimeFunction& phi, const Grid& grid);

/// Quadrature pairing of a nodal field (e.g. a mollified measure) with phi.
double pair_field(const Grid& grid, const GridFunction& field, const SpaceTimeFunction& phi);

struct MollifierConfig {
  /// Base width; zero selects min(side, T) / 4.
  double base_width = 0.0;
  /// Widen the kernel to two spacings (space) and two steps (time) when the
  /// nominal width w0 / n is below that. When false such levels are refused.
  bool clamp_to_grid = true;
};

struct MollifierWidths {
  double nominal = 0.0;
  double spatial = 0.0;
  double temporal = 0.0;
  bool clamped = false;
};

/// Kernel widths used for level n on `grid`. Throws GridError("grid too
/// coarse for level n") when clamping is disabled and the width is unresolved.
MollifierWidths mollifier_widths(int n, const Grid& grid, const MollifierConfig& config = {});

/// Replaces every atom by mass * rho_n (tensor bump (1 - r^2)^2, normalised
/// so that its discrete space-time integral equals the atom mass) and adds
/// the sampled density. The kernel is sampled at interior nodes and slices
/// 1..M, the support of the space-time quadrature seen by the stepper.
GridFunction mollify(const RadonMeasure& mu, int n, const Grid& grid,
                     const MollifierConfig& config = {});

struct NarrowRow {
  int level = 0;
  int test_id = 0;
  double mollified = 0.0;
  double exact = 0.0;
  double error = 0.0;
};

/// |pair(mollify(mu, n), phi) - pair(mu, phi)| for each level and test function.
std::vector<NarrowRow> narrow_convergence_report(const RadonMeasure& mu,
                                                 const std::vector<int>& levels,
                                                 const std::vector<SpaceTimeFunction>& panel,
                                                 const Grid& grid,
                                                 const MollifierConfig& config = {});

}  // namespace singpara
