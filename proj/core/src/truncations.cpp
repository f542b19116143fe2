#include "singpara/truncations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "singpara/errors.hpp"

namespace singpara {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    throw ParameterError(std::string(name) + " must be positive, got " + std::to_string(value));
  }
}

}  // namespace

double truncate(double k, double s) {
  require_positive(k, "truncation level k");
  return std::max(-k, std::min(s, k));
}

double excess(double k, double s) {
  require_positive(k, "truncation level k");
  // s - truncate(k, s) is exact in floating point whenever |s| > k.
  if (s > k) return s - k;
  if (s < -k) return s + k;
  return 0.0;
}

double truncation_primitive(double k, double eta, double s) {
  require_positive(k, "truncation level k");
  require_positive(eta, "power eta");
  if (s < 0.0) {
    throw DomainError("truncation_primitive is defined for s >= 0, got " + std::to_string(s));
  }
  if (s <= k) return std::pow(s, eta + 1.0) / (eta + 1.0);
  return std::pow(k, eta + 1.0) / (eta + 1.0) + std::pow(k, eta) * (s - k);
}

double vee(double delta, double s) {
  require_positive(delta, "width delta");
  if (s <= delta) return 1.0;
  if (s >= 2.0 * delta) return 0.0;
  return (2.0 * delta - s) / delta;
}

double vee_primitive(double delta, double s) {
  require_positive(delta, "width delta");
  if (s < 0.0) {
    throw DomainError("vee_primitive is defined for s >= 0, got " + std::to_string(s));
  }
  if (s <= delta) return s;
  if (s >= 2.0 * delta) return 1.5 * delta;
  return delta + (2.0 * delta * (s - delta) - 0.5 * (s * s - delta * delta)) / delta;
}

void TruncationFamily::validate() const {
  require_positive(k, "truncation level k");
  require_positive(eta, "power eta");
  require_positive(delta, "width delta");
  if (!(sigma >= 1.0)) throw ParameterError("sigma must be >= 1");
}

}  // namespace singpara
