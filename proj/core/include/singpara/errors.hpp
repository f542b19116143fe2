#pragma once

#include <stdexcept>
#include <string>

namespace singpara {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its admissible range (k <= 0, delta <= 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of a function (negative state, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The grid cannot resolve the requested quantity, or two grids disagree.
class GridError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or data file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The hypotheses of a study are not met; the study refuses to run.
class HypothesisRefusal : public Error {
 public:
  using Error::Error;
};

/// Nonlinear or fixed-point iteration did not converge.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int time_step, double last_residual)
      : Error(what), time_step_(time_step), last_residual_(last_residual) {}

  int time_step() const noexcept { return time_step_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  int time_step_;
  double last_residual_;
};

}  // namespace singpara
