#pragma once

/// @file stepper.hpp
/// @brief Implicit Euler for the level-n problem with a Picard fixed point per
/// step and a damped Newton solve for each frozen-source elliptic problem.

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "singpara/grid.hpp"
#include "singpara/problem.hpp"

namespace singpara {

struct SolverConfig {
  /// Picard stops when ||v_{j+1} - v_j||_{L^1} <= picard_tol |Omega|.
  double picard_tol = 1e-11;
  int picard_max = 200;
  /// Newton stops when max |R| <= newton_tol * (largest term magnitude).
  double newton_tol = 1e-12;
  int newton_max = 60;
  /// Initial Newton step length; halved until the residual decreases.
  double damping = 1.0;
  /// Jacobian regularisation, scaled by 1 + max |grad u|^2.
  double flux_regularization = 1e-10;
  double nonneg_tolerance = 1e-10;
  /// After this many plain Picard sweeps, or once a sweep contracts by less
  /// than contraction_limit, the fixed point is located by a Newton solve
  /// that differentiates h_n, then confirmed by one more application of G.
  bool accelerate = true;
  int plain_picard_iterations = 8;
  double contraction_limit = 0.5;
  /// Keep the per-step Picard distance sequence in the telemetry.
  bool record_distances = false;

  void validate() const;
  nlohmann::json to_json() const;
  static SolverConfig from_json(const nlohmann::json& j);
};

struct NewtonStats {
  int iterations = 0;
  double residual = 0.0;
  double scale = 0.0;
  double regularization = 0.0;
  int fallbacks = 0;
};

struct StepTelemetry {
  int step = 0;
  int picard_iterations = 0;
  int newton_iterations = 0;
  double picard_distance = 0.0;
  double residual = 0.0;
  bool accelerated = false;
  int fallbacks = 0;
  std::vector<double> distances;
};

struct SolveResult {
  GridFunction solution;
  std::vector<StepTelemetry> steps;
  int level = 0;
  SolverConfig config;
  double wall_seconds = 0.0;

  int total_picard_iterations() const;
  int total_newton_iterations() const;
  nlohmann::json telemetry_json() const;
};

/// One application of the fixed-point map: solves, at interior nodes,
///   (w - prev)/dt - div a(grad w) = h_n(max(v, 0)) f_n(t_{step}) + mu_n(t_{step})
/// with w = 0 on the boundary. `guess` (optional) seeds Newton.
/// Throws SolverError after the regularisation fallback ladder is exhausted.
std::vector<double> elliptic_step(const ApproximateProblem& ap, std::span<const double> prev,
                                  int step, std::span<const double> frozen,
                                  const SolverConfig& config, NewtonStats* stats = nullptr,
                                  std::span<const double> guess = {});

struct PicardResult {
  std::vector<double> slice;
  StepTelemetry telemetry;
};

/// Iterates the fixed-point map from `guess` (default: prev).
PicardResult picard_fixed_point(const ApproximateProblem& ap, std::span<const double> prev,
                                int step, const SolverConfig& config,
                                std::span<const double> guess = {});

/// Marches slices 1..M. When `guess` is given, its slice m seeds the Picard
/// iteration for step m (warm start or alternative initialisation).
SolveResult evolve(const ApproximateProblem& ap, const SolverConfig& config,
                   const GridFunction* guess = nullptr);

/// Weighted L^1(Omega) distance between two slices.
double slice_distance(const Grid& grid, std::span<const double> a, std::span<const double> b);

}  // namespace singpara
