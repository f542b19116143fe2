#include "singpara/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "singpara/errors.hpp"

namespace singpara {

RadonMeasure::RadonMeasure(const Box& box, double horizon) : box_(box), horizon_(horizon) {
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
}

void RadonMeasure::add_atom(const Point& x, double t, double mass) {
  if (!(mass > 0.0)) throw ParameterError("atom mass must be positive");
  if (!(t > 0.0 && t < horizon_)) throw DomainError("atom time must lie in (0, T)");
  if (!(box_.distance_to_boundary(x) > 0.0)) throw DomainError("atom must lie inside the domain");
  atoms_.push_back({x, t, mass});
  total_variation_ += mass;
}

void RadonMeasure::set_density(SpaceTimeFunction density, const Grid& grid) {
  GridFunction g = sample(grid, density);
  for (double v : g.values()) {
    if (v < 0.0) throw DomainError("measure density must be nonnegative");
  }
  const double mass = integrate_space_time(grid, g);
  if (density_) total_variation_ -= density_->mass;
  density_ = Density{std::move(density), mass};
  total_variation_ += mass;
}

double RadonMeasure::recompute_total_variation(const Grid& grid) const {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.mass;
  if (density_) s += integrate_space_time(grid, sample(grid, density_->value));
  return s;
}

double pair(const RadonMeasure& mu, const SpaceTimeFunction& phi, const Grid& grid) {
  double s = 0.0;
  for (const Atom& a : mu.atoms()) s += a.mass * phi(a.x, a.t);
  if (mu.density()) s += integrate_space_time(grid, sample(grid, mu.density()->value), phi);
  return s;
}

double pair_field(const Grid& grid, const GridFunction& field, const SpaceTimeFunction& phi) {
  return integrate_space_time(grid, field, phi);
}

MollifierWidths mollifier_widths(int n, const Grid& grid, const MollifierConfig& config) {
  if (n < 1) throw ParameterError("level n must be at least 1");
  const double w0 = config.base_width > 0.0
                        ? config.base_width
                        : 0.25 * std::min(grid.box().side(0), grid.horizon());
  MollifierWidths w;
  w.nominal = w0 / n;
  const double min_space = 2.0 * grid.spacing();
  const double min_time = 2.0 * grid.dt();
  if (w.nominal < min_space || w.nominal < min_time) {
    if (!config.clamp_to_grid) {
      throw GridError("grid too coarse for level n = " + std::to_string(n));
    }
    w.clamped = true;
  }
  w.spatial = std::max(w.nominal, min_space);
  w.temporal = std::max(w.nominal, min_time);
  return w;
}

namespace {

double bump(double r) {
  const double q = 1.0 - r * r;
  return q > 0.0 ? q * q : 0.0;
}

}  // namespace

GridFunction mollify(const RadonMeasure& mu, int n, const Grid& grid,
                     const MollifierConfig& config) {
  GridFunction out = GridFunction::zeros(grid);
  if (mu.empty()) return out;
  const MollifierWidths w = mollifier_widths(n, grid, config);
  const auto weights = grid.weights();
  const int dim = grid.dim();

  std::vector<double> spatial(grid.node_count());
  std::vector<double> temporal(static_cast<std::size_t>(grid.time_steps() + 1));
  for (const Atom& atom : mu.atoms()) {
    double space_sum = 0.0;
    for (std::size_t node : grid.interior()) {
      const Point x = grid.coordinate(node);
      double k = 1.0;
      for (int a = 0; a < dim; ++a) k *= bump((x[a] - atom.x[a]) / w.spatial);
      spatial[node] = k;
      space_sum += weights[node] * k;
    }
    double time_sum = 0.0;
    for (int m = 1; m <= grid.time_steps(); ++m) {
      temporal[m] = bump((grid.time(m) - atom.t) / w.temporal);
      time_sum += grid.dt() * temporal[m];
    }
    if (!(space_sum > 0.0) || !(time_sum > 0.0)) {
      throw GridError("mollifier kernel misses every grid node at level n = " + std::to_string(n));
    }
    const double scale = atom.mass / (space_sum * time_sum);
    for (int m = 1; m <= grid.time_steps(); ++m) {
      if (temporal[m] == 0.0) continue;
      auto slice = out.slice(m);
      for (std::size_t node : grid.interior()) slice[node] += scale * temporal[m] * spatial[node];
    }
  }
  if (mu.density()) {
    const GridFunction d = sample(grid, mu.density()->value);
    auto dst = out.values();
    const auto src = d.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return out;
}

std::vector<NarrowRow> narrow_convergence_report(const RadonMeasure& mu,
                                                 const std::vector<int>& levels,
                                                 const std::vector<SpaceTimeFunction>& panel,
                                                 const Grid& grid,
                                                 const MollifierConfig& config) {
  if (panel.empty()) throw ParameterError("test function panel is empty");
  std::vector<NarrowRow> rows;
  for (int n : levels) {
    const GridFunction field = mollify(mu, n, grid, config);
    for (std::size_t j = 0; j < panel.size(); ++j) {
      NarrowRow row;
      row.level = n;
      row.test_id = static_cast<int>(j);
      row.mollified = pair_field(grid, field, panel[j]);
      row.exact = pair(mu, panel[j], grid);
      row.error = std::abs(row.mollified - row.exact);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace singpara
