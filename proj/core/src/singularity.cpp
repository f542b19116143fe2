#include "singpara/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "singpara/errors.hpp"

namespace singpara {

double SingularityProfile::operator()(double s) const {
  if (s <= 0.0) return singular_at_zero ? std::numeric_limits<double>::infinity() : value_at_zero;
  return evaluate(s);
}

double SingularityProfile::slope(double s) const {
  if (derivative) return derivative(s);
  const double step = 1e-7 * std::max(s, 1e-8);
  const double lo = std::max(s - step, 0.5 * s);
  return (evaluate(s + step) - evaluate(lo)) / (s + step - lo);
}

double SingularityProfile::truncated(double n, double s) const {
  if (s <= 0.0) return singular_at_zero ? n : std::min(n, value_at_zero);
  return std::min(n, evaluate(s));
}

double SingularityProfile::truncated_slope(double n, double s) const {
  if (s <= 0.0) return 0.0;
  if (evaluate(s) >= n) return 0.0;
  return slope(s);
}

SingularityProfile power_profile(double gamma, double c, std::optional<double> theta, double s1,
                                 std::optional<double> cap) {
  if (gamma < 0.0) throw ParameterError("gamma must be nonnegative");
  if (!(c > 0.0)) throw ParameterError("power profile constant must be positive");
  if (theta && *theta < 0.0) throw ParameterError("theta must be nonnegative");
  if (!(s1 > 0.0)) throw ParameterError("s1 must be positive");
  if (cap && !(*cap > 0.0)) throw ParameterError("cap must be positive");

  SingularityProfile h;
  h.name = "power";
  const double tail_constant = theta ? c * std::pow(s1, *theta - gamma) : c;
  const double tail_power = theta ? *theta : gamma;
  const double cap_value = cap.value_or(std::numeric_limits<double>::infinity());
  h.evaluate = [=](double s) {
    const double raw = (s <= s1 || !theta) ? c * std::pow(s, -gamma)
                                           : tail_constant * std::pow(s, -tail_power);
    return std::min(cap_value, raw);
  };
  h.derivative = [=](double s) {
    const bool head = s <= s1 || !theta;
    const double raw = head ? c * std::pow(s, -gamma) : tail_constant * std::pow(s, -tail_power);
    if (raw >= cap_value) return 0.0;
    return head ? -gamma * c * std::pow(s, -gamma - 1.0)
                : -tail_power * tail_constant * std::pow(s, -tail_power - 1.0);
  };
  h.singular_at_zero = gamma > 0.0 && !cap;
  h.value_at_zero = gamma > 0.0 ? cap_value : std::min(cap_value, c);
  h.gamma = gamma;
  h.bound_constant = c;
  h.s0 = theta ? s1 : 1.0;
  h.sup_tail = std::min(cap_value, c * std::pow(h.s0, -gamma));
  h.theta = theta ? *theta : gamma;
  h.s1 = theta ? s1 : 1.0;
  h.nonincreasing = true;
  return h;
}

SingularityProfile constant_profile(double c) {
  if (!(c > 0.0)) throw ParameterError("constant profile must be positive");
  SingularityProfile h;
  h.name = "constant";
  h.evaluate = [c](double) { return c; };
  h.derivative = [](double) { return 0.0; };
  h.singular_at_zero = false;
  h.value_at_zero = c;
  h.gamma = 0.0;
  h.bound_constant = c;
  h.s0 = 1.0;
  h.sup_tail = c;
  h.theta = 0.0;
  h.s1 = 1.0;
  h.nonincreasing = true;
  return h;
}

SingularityProfile exp_power_profile(double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("exp_power profile needs gamma > 0");
  SingularityProfile h;
  h.name = "exp_power";
  h.evaluate = [gamma](double s) { return std::exp(-s) + std::pow(s, -gamma); };
  h.derivative = [gamma](double s) { return -std::exp(-s) - gamma * std::pow(s, -gamma - 1.0); };
  h.singular_at_zero = true;
  h.gamma = gamma;
  // e^{-s} <= 1 <= s^{-gamma} on (0, 1].
  h.bound_constant = 2.0;
  h.s0 = 1.0;
  h.sup_tail = std::exp(-1.0) + 1.0;
  h.theta = gamma;
  h.s1 = 1.0;
  h.nonincreasing = true;
  return h;
}

SingularityProfile increasing_profile() {
  SingularityProfile h;
  h.name = "increasing";
  h.evaluate = [](double s) { return 2.0 - std::exp(-s); };
  h.derivative = [](double s) { return std::exp(-s); };
  h.singular_at_zero = false;
  h.value_at_zero = 1.0;
  h.gamma = 0.0;
  h.bound_constant = 2.0;
  h.s0 = 1.0;
  h.sup_tail = 2.0;
  h.nonincreasing = false;
  return h;
}

}  // namespace singpara
