#pragma once

/// @file truncations.hpp
/// @brief Scalar truncation gadgets shared by the solver and the monitors.
///
/// All functions are pure and thread-safe. Closed forms are used throughout;
/// the tests check them against quadrature.

namespace singpara {

/// Clamp to [-k, k]. Throws ParameterError for k <= 0.
double truncate(double k, double s);

/// Complement of truncate: truncate(k, s) + excess(k, s) == s.
double excess(double k, double s);

/// Primitive \int_0^s truncate(k, t)^eta dt for s >= 0.
///
/// Closed form: s^{eta+1}/(eta+1) below k, linear continuation k^eta (s-k)
/// above. Throws DomainError for s < 0.
double truncation_primitive(double k, double eta, double s);

/// Piecewise linear cut-off: 1 on (-inf, delta], 0 on [2 delta, inf).
double vee(double delta, double s);

/// Primitive \int_0^s vee(delta, t) dt for s >= 0; saturates at 3 delta / 2.
double vee_primitive(double delta, double s);

/// Parameter bundle for the truncation family used by the estimates.
struct TruncationFamily {
  double k = 1.0;
  double eta = 1.0;
  double delta = 1.0;
  double sigma = 1.0;

  /// Throws ParameterError unless k, eta, delta > 0 and sigma >= 1.
  void validate() const;
};

}  // namespace singpara
