#pragma once

/// @file estimates.hpp
/// @brief Monitors that evaluate a priori estimates and the weak formulation
/// on a computed solution.
///
/// Indicator sets such as {u <= delta} are decided nodally for nodal
/// integrands and by the edge-averaged state for gradient integrands.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "singpara/grid.hpp"
#include "singpara/problem.hpp"
#include "singpara/stepper.hpp"

namespace singpara {

enum class Verdict { pass, fail, info, skipped };

std::string to_string(Verdict v);

struct EstimateReport {
  std::string monitor;
  int level = 0;
  /// Ordered parameters (k, eps, delta, q, cutoff, ...).
  std::vector<std::pair<std::string, double>> params;
  double value = 0.0;
  std::optional<double> bound;
  Verdict verdict = Verdict::info;
  std::string note;

  std::string params_string() const;
  nlohmann::json to_json() const;
};

/// Writes the header `monitor,n,params,value,bound,verdict`.
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const EstimateReport& r);

/// Least-squares slope of log(y) against log(x); requires >= 2 positive points.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// |a - b| / max(|a|, |b|), zero when both vanish.
double relative_gap(double a, double b);

/// max_m int_Omega u(t_m) against mass_bound_constant with 5% slack.
EstimateReport linf_l1_monitor(const SolveResult& result, const Problem& problem,
                               const Grid& grid);

/// sum_m dt sum_e w_e |grad_e T_k(u)|^p phi_e^p for one k.
double truncation_energy(const Grid& grid, const GridFunction& u, double k,
                         const CutoffFunction& cutoff, double p);

/// One row per k plus a slope row. The slope is fitted on the k with
/// k < max u (the active range); it needs at least three such k.
std::vector<EstimateReport> truncation_energy_monitor(const SolveResult& result, const Grid& grid,
                                                      const std::vector<double>& k_ladder,
                                                      const CutoffFunction& cutoff, double p,
                                                      double slope_limit = 1.1);

/// Energy on edges whose averaged state lies in (k, k + 1).
EstimateReport strip_energy_monitor(const SolveResult& result, const Grid& grid, double k,
                                    const CutoffFunction& cutoff, double p);

/// int_Q h_n(u) f_n phi.
EstimateReport singular_mass_monitor(const SolveResult& result, const ApproximateProblem& ap,
                                     const CutoffFunction& cutoff);

struct TraceOptions {
  /// Exponent gamma of the singularity; the interpolation quantity is
  /// recorded when gamma > 1.
  double gamma = 0.0;
  double p = 2.0;
  double noise = 0.05;
};

/// Worst-slice strip averages (1/eps) int_{Omega_eps} T_k(u) for each eps.
/// Passes when the values shrink along the decreasing eps ladder (within the
/// noise slack) and the smallest-eps value is within C (h + eps), C fitted
/// on the remaining rungs. Throws GridError if some eps <= 2 h.
std::vector<EstimateReport> boundary_trace_monitor(const SolveResult& result, const Grid& grid,
                                                   double k,
                                                   const std::vector<double>& eps_ladder,
                                                   const TraceOptions& options = {});

struct ResidualTerms {
  double time_term = 0.0;
  double initial_term = 0.0;
  double flux_term = 0.0;
  double source_term = 0.0;
  double measure_term = 0.0;

  double lhs() const { return time_term + initial_term + flux_term; }
  double rhs() const { return source_term + measure_term; }
};

/// The five integrals of the weak identity for one cut-off.
ResidualTerms distributional_terms(const GridFunction& u, const Problem& problem,
                                   const ApproximateProblem& ap, const CutoffFunction& cutoff);

/// |LHS - RHS| of the weak identity with the measure paired exactly.
EstimateReport distributional_residual_monitor(const SolveResult& result, const Problem& problem,
                                               const ApproximateProblem& ap,
                                               const CutoffFunction& cutoff);

struct DeltaSplitRow {
  double delta = 0.0;
  double split = 0.0;
  double majorant = 0.0;
};

/// A(delta) = int_{u <= delta} h_n(u) f_n phi and its majorant
///   -int Phi_delta(u) phi_t + int |a(grad u)| |grad phi| V_delta(u).
/// Deltas hitting a nodal value within 1e-12 are nudged upward.
std::vector<DeltaSplitRow> delta_split_table(const SolveResult& result,
                                             const ApproximateProblem& ap,
                                             const CutoffFunction& cutoff,
                                             const std::vector<double>& deltas);

/// Rows per delta (A <= 1.05 majorant) plus a slope row (slope >= 0.8 / p').
std::vector<EstimateReport> delta_split_monitor(const SolveResult& result,
                                                const ApproximateProblem& ap,
                                                const CutoffFunction& cutoff,
                                                const std::vector<double>& deltas);

/// sum_m dt sum_e w_e |grad_e u|^r (phi^r when a cut-off is given).
double gradient_energy(const Grid& grid, const GridFunction& u, double r,
                       const CutoffFunction* cutoff = nullptr);

/// Local q-energy; throws HypothesisRefusal unless 2 - 1/(N+1) < p < N and
/// q < p - N/(N+1).
EstimateReport gradient_energy_q_monitor(const SolveResult& result, const Problem& problem,
                                         const Grid& grid, double q, const CutoffFunction& cutoff);

/// Global p-energy.
EstimateReport gradient_energy_p_monitor(const SolveResult& result, const Grid& grid, double p);

/// (1/T) int_Q T~_{k,1}(|v - w|). Throws GridError on shape mismatch.
double uniqueness_functional(const Grid& grid, const GridFunction& v, const GridFunction& w,
                             double k);

/// int_Q |a(grad u) - a(grad v)| phi, the observable shadow of flux convergence.
double flux_cauchy_gap(const Grid& grid, const Flux& flux, const GridFunction& u,
                       const GridFunction& v, const CutoffFunction& cutoff);

/// ||u - v||_{L^1(Q)} with the space-time quadrature of the grid.
double l1_distance(const Grid& grid, const GridFunction& u, const GridFunction& v);

}  // namespace singpara
