#pragma once

/// @file flux.hpp
/// @brief Flux fields a(x, t, xi) of the quasilinear operator -div a(x, t, grad u).

#include <functional>
#include <memory>
#include <string>

#include "singpara/grid.hpp"

namespace singpara {

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Abstract flux. Implementations must be safe to call concurrently.
class Flux {
 public:
  virtual ~Flux() = default;

  virtual Vector value(const Point& x, double t, const Vector& xi, int dim) const = 0;

  /// d a / d xi of the regularised flux used for Newton Jacobians. The
  /// default implementation differentiates value() by central differences.
  virtual Matrix2 jacobian(const Point& x, double t, const Vector& xi, int dim,
                           double regularization) const;

  /// Growth exponent p.
  virtual double exponent() const = 0;
  virtual std::string name() const = 0;
};

/// a(xi) = |xi|^{p-2} xi.
class PLaplacianFlux final : public Flux {
 public:
  explicit PLaplacianFlux(double p);

  Vector value(const Point& x, double t, const Vector& xi, int dim) const override;
  /// Jacobian of (|xi|^2 + eps)^{(p-2)/2} xi.
  Matrix2 jacobian(const Point& x, double t, const Vector& xi, int dim,
                   double regularization) const override;
  double exponent() const override { return p_; }
  std::string name() const override { return "p_laplacian"; }

 private:
  double p_;
};

/// a(x, t, xi) = c(x, t) |xi|^{p-2} xi with c_min <= c <= c_max.
class WeightedPLaplacianFlux final : public Flux {
 public:
  using Coefficient = std::function<double(const Point&, double)>;

  WeightedPLaplacianFlux(double p, Coefficient coefficient, double c_min, double c_max);

  Vector value(const Point& x, double t, const Vector& xi, int dim) const override;
  Matrix2 jacobian(const Point& x, double t, const Vector& xi, int dim,
                   double regularization) const override;
  double exponent() const override { return base_.exponent(); }
  std::string name() const override { return "weighted_p_laplacian"; }
  double c_min() const { return c_min_; }
  double c_max() const { return c_max_; }

 private:
  PLaplacianFlux base_;
  Coefficient coefficient_;
  double c_min_;
  double c_max_;
};

/// User extension point: wraps an arbitrary callable. The Jacobian falls
/// back to finite differences.
class CallbackFlux final : public Flux {
 public:
  using Callback = std::function<Vector(const Point&, double, const Vector&, int)>;

  CallbackFlux(double p, Callback callback, std::string name = "callback");

  Vector value(const Point& x, double t, const Vector& xi, int dim) const override;
  double exponent() const override { return p_; }
  std::string name() const override { return name_; }

 private:
  double p_;
  Callback callback_;
  std::string name_;
};

double norm(const Vector& v, int dim);
double dot(const Vector& a, const Vector& b, int dim);

}  // namespace singpara
