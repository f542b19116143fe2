#include "singpara/stepper.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "singpara/errors.hpp"
#include "singpara/flux.hpp"

namespace singpara {

void SolverConfig::validate() const {
  if (!(picard_tol > 0.0) || !(newton_tol > 0.0)) throw ParameterError("tolerances must be positive");
  if (picard_max < 1 || newton_max < 1) throw ParameterError("iteration limits must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw ParameterError("damping must lie in (0, 1]");
  if (flux_regularization < 0.0 || nonneg_tolerance < 0.0) {
    throw ParameterError("regularisation and nonnegativity tolerance must be nonnegative");
  }
  if (plain_picard_iterations < 1) throw ParameterError("plain_picard_iterations must be positive");
  if (!(contraction_limit > 0.0)) throw ParameterError("contraction_limit must be positive");
}

nlohmann::json SolverConfig::to_json() const {
  return {{"picard_tol", picard_tol},
          {"picard_max", picard_max},
          {"newton_tol", newton_tol},
          {"newton_max", newton_max},
          {"damping", damping},
          {"flux_regularization", flux_regularization},
          {"nonneg_tolerance", nonneg_tolerance},
          {"accelerate", accelerate},
          {"plain_picard_iterations", plain_picard_iterations},
          {"contraction_limit", contraction_limit}};
}

SolverConfig SolverConfig::from_json(const nlohmann::json& j) {
  SolverConfig c;
  c.picard_tol = j.value("picard_tol", c.picard_tol);
  c.picard_max = j.value("picard_max", c.picard_max);
  c.newton_tol = j.value("newton_tol", c.newton_tol);
  c.newton_max = j.value("newton_max", c.newton_max);
  c.damping = j.value("damping", c.damping);
  c.flux_regularization = j.value("flux_regularization", c.flux_regularization);
  c.nonneg_tolerance = j.value("nonneg_tolerance", c.nonneg_tolerance);
  c.accelerate = j.value("accelerate", c.accelerate);
  c.plain_picard_iterations = j.value("plain_picard_iterations", c.plain_picard_iterations);
  c.contraction_limit = j.value("contraction_limit", c.contraction_limit);
  c.record_distances = j.value("record_distances", c.record_distances);
  c.validate();
  return c;
}

int SolveResult::total_picard_iterations() const {
  int s = 0;
  for (const auto& t : steps) s += t.picard_iterations;
  return s;
}

int SolveResult::total_newton_iterations() const {
  int s = 0;
  for (const auto& t : steps) s += t.newton_iterations;
  return s;
}

nlohmann::json SolveResult::telemetry_json() const {
  nlohmann::json per_step = nlohmann::json::array();
  int accelerated = 0;
  double worst_residual = 0.0;
  for (const auto& t : steps) {
    nlohmann::json s = {{"step", t.step},
                        {"picard_iterations", t.picard_iterations},
                        {"newton_iterations", t.newton_iterations},
                        {"picard_distance", t.picard_distance},
                        {"residual", t.residual},
                        {"accelerated", t.accelerated},
                        {"fallbacks", t.fallbacks}};
    if (!t.distances.empty()) s["distances"] = t.distances;
    per_step.push_back(std::move(s));
    accelerated += t.accelerated ? 1 : 0;
    worst_residual = std::max(worst_residual, t.residual);
  }
  return {{"level", level},
          {"config", config.to_json()},
          {"wall_seconds", wall_seconds},
          {"picard_iterations", total_picard_iterations()},
          {"newton_iterations", total_newton_iterations()},
          {"accelerated_steps", accelerated},
          {"worst_residual", worst_residual},
          {"steps", per_step}};
}

double slice_distance(const Grid& grid, std::span<const double> a, std::span<const double> b) {
  const auto w = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * std::abs(a[i] - b[i]);
  return s;
}

namespace {

struct Residual {
  std::vector<double> values;  // per node, zero on the boundary
  double max_abs = 0.0;
  double scale = 0.0;
};

// Nonlinear system of one implicit Euler step on the interior nodes.
class StepSystem {
 public:
  StepSystem(const ApproximateProblem& ap, std::span<const double> prev, int step)
      : ap_(ap), grid_(ap.grid), prev_(prev), step_(step), t_(grid_.time(step)) {
    if (step < 1 || step > grid_.time_steps()) throw ParameterError("step index out of range");
    if (prev.size() != grid_.node_count()) throw GridError("slice size does not match the grid");
    unknown_.assign(grid_.node_count(), -1);
    for (std::size_t node : grid_.interior()) {
      unknown_[node] = static_cast<int>(nodes_.size());
      nodes_.push_back(node);
    }
    f_ = ap.source.slice(step);
    mu_ = ap.measure.slice(step);
  }

  /// Source with the singular factor frozen at v.
  std::vector<double> frozen_source(std::span<const double> v) const {
    std::vector<double> s(grid_.node_count(), 0.0);
    for (std::size_t node : nodes_) s[node] = ap_.h_n(v[node]) * f_[node] + mu_[node];
    return s;
  }

  /// Residual with either a fixed source or, when `source` is empty, the
  /// source coupled to w itself.
  Residual residual(std::span<const double> w, std::span<const double> source) const {
    Residual r;
    r.values.assign(grid_.node_count(), 0.0);
    std::vector<double> magnitude(grid_.node_count(), 0.0);
    const double inv_h = 1.0 / grid_.spacing();
    for (const Edge& e : grid_.edges()) {
      if (!e.touches_interior) continue;
      const Vector a = ap_.flux->value(e.midpoint, t_, edge_gradient(grid_, e, w), grid_.dim());
      const double normal = a[e.axis] * inv_h;
      if (!grid_.is_boundary(e.lo)) {
        r.values[e.lo] -= normal;
        magnitude[e.lo] += std::abs(normal);
      }
      if (!grid_.is_boundary(e.hi)) {
        r.values[e.hi] += normal;
        magnitude[e.hi] += std::abs(normal);
      }
    }
    const double inv_dt = 1.0 / grid_.dt();
    for (std::size_t node : nodes_) {
      const double s = source.empty() ? ap_.h_n(w[node]) * f_[node] + mu_[node] : source[node];
      r.values[node] += (w[node] - prev_[node]) * inv_dt - s;
      const double m = magnitude[node] + (std::abs(w[node]) + std::abs(prev_[node])) * inv_dt +
                       std::abs(s);
      r.scale = std::max(r.scale, m);
      r.max_abs = std::max(r.max_abs, std::abs(r.values[node]));
    }
    return r;
  }

  /// Solves J d = -r for the Newton direction (node-indexed, zero on the
  /// boundary). Returns false if the linear solve fails.
  bool direction(std::span<const double> w, bool coupled, double reg, const Residual& r,
                 std::vector<double>& d) {
    const std::size_t n = nodes_.size();
    triplets_.clear();
    const double inv_h = 1.0 / grid_.spacing();
    const double inv_dt = 1.0 / grid_.dt();
    const int dim = grid_.dim();
    for (const Edge& e : grid_.edges()) {
      if (!e.touches_interior) continue;
      const Matrix2 j = ap_.flux->jacobian(e.midpoint, t_, edge_gradient(grid_, e, w), dim, reg);
      const double along = j[e.axis][e.axis] * inv_h;
      const double across = dim == 2 ? j[e.axis][1 - e.axis] : 0.0;
      // dA_axis/dw for every node in the stencil of this edge.
      auto emit = [&](std::size_t column, double d_flux) {
        const int c = unknown_[column];
        if (c < 0) return;
        if (!grid_.is_boundary(e.lo)) triplets_.emplace_back(unknown_[e.lo], c, -d_flux * inv_h);
        if (!grid_.is_boundary(e.hi)) triplets_.emplace_back(unknown_[e.hi], c, d_flux * inv_h);
      };
      emit(e.lo, -along);
      emit(e.hi, along);
      for (int k = 0; k < e.transverse_count; ++k) {
        emit(e.transverse_nodes[k], across * e.transverse_coefficients[k]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double diag = inv_dt;
      if (coupled) diag -= ap_.h_n_slope(w[nodes_[i]]) * f_[nodes_[i]];
      triplets_.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
    }

    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -r.values[nodes_[i]];
    std::vector<double> x;
    if (!(dim == 1 ? solve_tridiagonal(rhs, x) : solve_sparse(rhs, x))) return false;
    d.assign(grid_.node_count(), 0.0);
    for (std::size_t i = 0; i < n; ++i) d[nodes_[i]] = x[i];
    return true;
  }

  std::span<const std::size_t> nodes() const { return nodes_; }
  const Grid& grid() const { return grid_; }

 private:
  bool solve_tridiagonal(const std::vector<double>& rhs, std::vector<double>& x) const {
    const std::size_t n = rhs.size();
    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
    for (const auto& t : triplets_) {
      const auto r = static_cast<std::size_t>(t.row());
      const auto c = static_cast<std::size_t>(t.col());
      if (c == r) diag[r] += t.value();
      else if (c + 1 == r) lower[r] += t.value();
      else if (c == r + 1) upper[r] += t.value();
      else return false;
    }
    // Thomas algorithm.
    std::vector<double> cp(n), dp(n);
    double denom = diag[0];
    if (denom == 0.0) return false;
    cp[0] = upper[0] / denom;
    dp[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
      denom = diag[i] - lower[i] * cp[i - 1];
      if (denom == 0.0 || !std::isfinite(denom)) return false;
      cp[i] = upper[i] / denom;
      dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom;
    }
    x.assign(n, 0.0);
    x[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
    return true;
  }

  bool solve_sparse(const std::vector<double>& rhs, std::vector<double>& x) {
    const auto n = static_cast<Eigen::Index>(rhs.size());
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets_.begin(), triplets_.end());
    if (!analyzed_) {
      lu_.analyzePattern(a);
      analyzed_ = true;
    }
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success) return false;
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    const Eigen::VectorXd sol = lu_.solve(b);
    if (lu_.info() != Eigen::Success) return false;
    x.assign(sol.data(), sol.data() + n);
    return true;
  }

  const ApproximateProblem& ap_;
  const Grid& grid_;
  std::span<const double> prev_;
  int step_;
  double t_;
  std::vector<int> unknown_;
  std::vector<std::size_t> nodes_;
  std::span<const double> f_;
  std::span<const double> mu_;
  std::vector<Eigen::Triplet<double>> triplets_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

double max_gradient_squared(const Grid& grid, std::span<const double> w) {
  double g = 0.0;
  for (const Edge& e : grid.edges()) {
    const Vector v = edge_gradient(grid, e, w);
    g = std::max(g, v[0] * v[0] + v[1] * v[1]);
  }
  return g;
}

// Damped Newton from w (modified in place). Returns true on convergence.
bool newton(StepSystem& system, std::vector<double>& w, std::span<const double> source,
            double reg, const SolverConfig& config, NewtonStats& stats) {
  const bool coupled = source.empty();
  Residual r = system.residual(w, source);
  std::vector<double> d;
  std::vector<double> trial(w.size());
  for (int it = 0;; ++it) {
    stats.residual = r.max_abs;
    stats.scale = r.scale;
    if (r.max_abs <= config.newton_tol * r.scale || r.max_abs == 0.0) return true;
    if (it >= config.newton_max) return false;
    if (!system.direction(w, coupled, reg, r, d)) return false;
    ++stats.iterations;
    double lambda = config.damping;
    bool accepted = false;
    while (lambda > 1e-10) {
      for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] + lambda * d[i];
      Residual rt = system.residual(trial, source);
      if (rt.max_abs < r.max_abs) {
        w.swap(trial);
        r = std::move(rt);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      stats.residual = r.max_abs;
      return false;
    }
  }
}

// Newton with the regularisation fallback ladder (x100, twice).
std::vector<double> solve_with_fallback(StepSystem& system, std::span<const double> source,
                                        std::span<const double> guess, const SolverConfig& config,
                                        NewtonStats& stats, int step) {
  const Grid& grid = system.grid();
  std::vector<double> start(guess.begin(), guess.end());
  for (std::size_t node : grid.boundary()) start[node] = 0.0;
  double reg = config.flux_regularization * (1.0 + max_gradient_squared(grid, start));
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::vector<double> w = start;
    stats.regularization = reg;
    if (newton(system, w, source, reg, config, stats)) return w;
    ++stats.fallbacks;
    reg = std::max(reg * 100.0, 1e-300);
  }
  throw SolverError("Newton stagnated after the regularisation fallback ladder", step,
                    stats.residual);
}

}  // namespace

std::vector<double> elliptic_step(const ApproximateProblem& ap, std::span<const double> prev,
                                  int step, std::span<const double> frozen,
                                  const SolverConfig& config, NewtonStats* stats,
                                  std::span<const double> guess) {
  StepSystem system(ap, prev, step);
  if (frozen.size() != ap.grid.node_count()) throw GridError("frozen state has the wrong size");
  const std::vector<double> source = system.frozen_source(frozen);
  NewtonStats local;
  auto w = solve_with_fallback(system, source, guess.empty() ? prev : guess, config, local, step);
  if (stats) *stats = local;
  return w;
}

PicardResult picard_fixed_point(const ApproximateProblem& ap, std::span<const double> prev,
                                int step, const SolverConfig& config,
                                std::span<const double> guess) {
  const Grid& grid = ap.grid;
  StepSystem system(ap, prev, step);
  const double tol = config.picard_tol * grid.box().volume();

  PicardResult out;
  StepTelemetry& tel = out.telemetry;
  tel.step = step;
  std::vector<double> v(guess.empty() ? prev.begin() : guess.begin(),
                        guess.empty() ? prev.end() : guess.end());
  for (std::size_t node : grid.boundary()) v[node] = 0.0;

  auto apply_map = [&](const std::vector<double>& state) {
    const std::vector<double> source = system.frozen_source(state);
    NewtonStats stats;
    auto w = solve_with_fallback(system, source, state, config, stats, step);
    tel.newton_iterations += stats.iterations;
    tel.fallbacks += stats.fallbacks;
    tel.residual = stats.scale > 0.0 ? stats.residual / stats.scale : 0.0;
    ++tel.picard_iterations;
    return w;
  };

  double previous_distance = std::numeric_limits<double>::infinity();
  bool tried_coupled = false;
  while (tel.picard_iterations < config.picard_max) {
    std::vector<double> w = apply_map(v);
    const double d = slice_distance(grid, w, v);
    tel.picard_distance = d;
    if (config.record_distances) tel.distances.push_back(d);
    if (d <= tol) {
      out.slice = std::move(w);
      return out;
    }
    const bool slow = d > config.contraction_limit * previous_distance;
    if (config.accelerate && !tried_coupled &&
        (tel.picard_iterations >= config.plain_picard_iterations || slow)) {
      tried_coupled = true;
      tel.accelerated = true;
      NewtonStats stats;
      try {
        w = solve_with_fallback(system, {}, w, config, stats, step);
      } catch (const SolverError&) {
        // Keep iterating the plain map from the last iterate.
      }
      tel.newton_iterations += stats.iterations;
      tel.fallbacks += stats.fallbacks;
    }
    previous_distance = d;
    v = std::move(w);
  }
  throw SolverError("Picard iteration did not converge; last distance " +
                        std::to_string(tel.picard_distance),
                    step, tel.picard_distance);
}

SolveResult evolve(const ApproximateProblem& ap, const SolverConfig& config,
                   const GridFunction* guess) {
  config.validate();
  const Grid& grid = ap.grid;
  if (guess && !guess->matches(grid)) throw GridError("initial guess does not match the grid");
  const auto start = std::chrono::steady_clock::now();

  SolveResult result;
  result.level = ap.level;
  result.config = config;
  result.solution = GridFunction::zeros(grid);
  auto first = result.solution.slice(0);
  std::copy(ap.initial.begin(), ap.initial.end(), first.begin());
  for (std::size_t node : grid.boundary()) first[node] = 0.0;

  for (int m = 1; m <= grid.time_steps(); ++m) {
    const auto prev = result.solution.slice(m - 1);
    PicardResult step;
    try {
      step = picard_fixed_point(ap, prev, m, config,
                                guess ? guess->slice(m) : std::span<const double>{});
    } catch (const SolverError& e) {
      throw SolverError("time step " + std::to_string(m) + ": " + e.what(), m, e.last_residual());
    }
    for (std::size_t node : grid.boundary()) step.slice[node] = 0.0;
    const double lowest = *std::min_element(step.slice.begin(), step.slice.end());
    if (lowest < -config.nonneg_tolerance) {
      throw SolverError("time step " + std::to_string(m) + ": negative state " +
                            std::to_string(lowest),
                        m, lowest);
    }
    std::copy(step.slice.begin(), step.slice.end(), result.solution.slice(m).begin());
    result.steps.push_back(std::move(step.telemetry));
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace singpara
