#pragma once

/// @file singularity.hpp
/// @brief The zero-order factor h and its declared envelope parameters.

#include <functional>
#include <optional>
#include <string>

namespace singpara {

/// Continuous, possibly singular factor h: [0, inf) -> [0, inf].
///
/// Declared envelope: h(s) <= bound_constant * s^{-gamma} on (0, s0] and
/// h <= sup_tail on [s0, inf). Optionally h(s) <= C s^{-theta} for s >= s1.
/// h(0) = inf is a flag; h is never evaluated at exactly 0.
struct SingularityProfile {
  std::string name = "custom";
  std::function<double(double)> evaluate;
  /// Optional analytic h'(s); central differences are used when empty.
  std::function<double(double)> derivative;
  bool singular_at_zero = true;
  double value_at_zero = 0.0;
  double gamma = 0.0;
  double bound_constant = 1.0;
  double s0 = 1.0;
  std::optional<double> sup_tail;
  std::optional<double> theta;
  std::optional<double> s1;
  bool nonincreasing = false;

  double sigma() const { return gamma > 1.0 ? gamma : 1.0; }

  /// h(s) for s > 0; h(0) (possibly +inf) for s <= 0.
  double operator()(double s) const;
  double slope(double s) const;

  /// h_n(s) = min(n, h(max(s, 0))); h_n(0) = n when h(0) = inf.
  double truncated(double n, double s) const;
  /// d h_n / ds at max(s, 0); zero where the truncation is active.
  double truncated_slope(double n, double s) const;
};

/// Power family h(s) = C s^{-gamma} for s <= s1, C s1^{theta-gamma} s^{-theta}
/// beyond s1 when theta is given, optionally capped at `cap`.
SingularityProfile power_profile(double gamma, double c = 1.0, std::optional<double> theta = {},
                                 double s1 = 1.0, std::optional<double> cap = {});

/// h(s) = c.
SingularityProfile constant_profile(double c);

/// h(s) = e^{-s} + s^{-gamma}.
SingularityProfile exp_power_profile(double gamma);

/// h(s) = 2 - e^{-s}: bounded, positive at 0, and increasing.
SingularityProfile increasing_profile();

}  // namespace singpara
