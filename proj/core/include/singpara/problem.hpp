#pragma once

/// @file problem.hpp
/// @brief Continuous problem data, hypothesis validation and the level-n
/// approximating problem.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "singpara/flux.hpp"
#include "singpara/grid.hpp"
#include "singpara/measures.hpp"
#include "singpara/singularity.hpp"

namespace singpara {

/// Nonnegative scalar field on Q (or on Omega when time is ignored).
///
/// Either a formula or values already sampled on a specific grid; samples
/// take precedence when they match the grid being used.
struct ScalarField {
  std::string name = "zero";
  SpaceTimeFunction formula;
  std::shared_ptr<const GridFunction> samples;

  static ScalarField zero();
  static ScalarField constant(double c);
  static ScalarField from_formula(std::string name, SpaceTimeFunction f);
  static ScalarField from_samples(std::string name, GridFunction g);

  GridFunction sample_on(const Grid& grid) const;
};

struct Problem {
  Box box;
  double horizon = 1.0;
  double p = 2.0;
  std::shared_ptr<const Flux> flux;
  SingularityProfile singularity;
  ScalarField source;
  ScalarField initial;
  RadonMeasure measure;

  /// True when 2 - 1/(N+1) < p < N.
  bool in_exponent_window() const;
  /// Throws ParameterError / DomainError if the data violate the basic
  /// invariants (T > 0, p > 1, f >= 0, u0 >= 0 on the grid samples).
  void validate(const Grid& grid) const;
};

/// Result of a sampled hypothesis check.
struct ValidationReport {
  bool passed = true;
  /// Name of the first violated condition, empty when passed.
  std::string failed_condition;
  std::string witness;
  /// Named diagnostic values (empirical constants, worst margins).
  std::vector<std::pair<std::string, double>> values;

  double get(const std::string& key) const;
};

/// Samples (x, t, xi, eta) and checks coercivity, growth and strict
/// monotonicity. Reports empirical alpha and beta.
ValidationReport validate_structure(const Flux& flux, const Box& box, double horizon,
                                    int sample_count, std::uint64_t seed);

/// Checks the declared envelope on (0, s0], the tail bound on [s0, s_max],
/// finiteness, h(0+) != 0 and, when declared, monotonicity.
ValidationReport validate_singularity(const SingularityProfile& profile, int sample_count,
                                      double s_max);

struct ConjugateExponents {
  /// r N / (N - r); empty when r >= N.
  std::optional<double> sobolev;
  double holder = 0.0;
};

ConjugateExponents conjugate_exponents(double r, int n);

struct SourceClass {
  std::string label;
  double norm = 0.0;
  bool eligible = false;
  std::string note;
};

/// Mixed-norm classification of f for the finite-energy regime.
///
/// theta < 1 with p < N: the discrete L^{p/(p-1+theta)}(0,T; L^{r}) norm with
/// r the Hoelder conjugate of p^* / (1 - theta), label "finite_energy".
/// theta >= 1: the L^1(Q) norm, label "l1". theta < 1 with p >= N: the
/// L^1 norm, label "unavailable", not eligible.
SourceClass classify_source_regularity(const Problem& problem, double theta, const Grid& grid);

/// Level-n data sampled on a grid. The singularity is evaluated as
/// h_n(s) = min(n, h(max(s, 0))).
struct ApproximateProblem {
  int level = 1;
  Grid grid;
  std::shared_ptr<const Flux> flux;
  SingularityProfile singularity;
  /// f_n = T_n(f) at every node and slice.
  GridFunction source;
  /// u0_n = T_n(u0) with homogeneous Dirichlet values imposed.
  std::vector<double> initial;
  /// Mollified measure at every node and slice.
  GridFunction measure;
  MollifierWidths widths;

  double h_n(double s) const { return singularity.truncated(level, s); }
  double h_n_slope(double s) const { return singularity.truncated_slope(level, s); }
};

ApproximateProblem build_approximation(const Problem& problem, int n, const Grid& grid,
                                       const MollifierConfig& mollifier = {});

/// Explicit bound for sup_t int_Omega u_n(t):
///   ||f||_{L^1(Q)} (C + sup_{[s0, inf)} h) + |mu|(Q) + |Omega| + \int T~_{1,sigma}(u0)
/// with C the envelope constant. Integrals use grid quadrature.
double mass_bound_constant(const Problem& problem, const Grid& grid);

}  // namespace singpara
