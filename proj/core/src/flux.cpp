#include "singpara/flux.hpp"

#include <cmath>
#include <utility>

#include "singpara/errors.hpp"

namespace singpara {

double dot(const Vector& a, const Vector& b, int dim) {
  double s = 0.0;
  for (int c = 0; c < dim; ++c) s += a[c] * b[c];
  return s;
}

double norm(const Vector& v, int dim) { return std::sqrt(dot(v, v, dim)); }

Matrix2 Flux::jacobian(const Point& x, double t, const Vector& xi, int dim,
                       double regularization) const {
  Matrix2 jac{};
  const double scale = std::max(norm(xi, dim), std::sqrt(std::max(regularization, 1e-300)));
  for (int c = 0; c < dim; ++c) {
    const double step = 1e-6 * std::max(scale, 1e-8);
    Vector plus = xi;
    Vector minus = xi;
    plus[c] += step;
    minus[c] -= step;
    const Vector ap = value(x, t, plus, dim);
    const Vector am = value(x, t, minus, dim);
    for (int r = 0; r < dim; ++r) jac[r][c] = (ap[r] - am[r]) / (2.0 * step);
  }
  return jac;
}

PLaplacianFlux::PLaplacianFlux(double p) : p_(p) {
  if (!(p > 1.0)) throw ParameterError("p-Laplacian exponent must exceed 1");
}

Vector PLaplacianFlux::value(const Point&, double, const Vector& xi, int dim) const {
  const double n2 = dot(xi, xi, dim);
  if (n2 == 0.0) return {0.0, 0.0};
  const double factor = p_ == 2.0 ? 1.0 : std::pow(n2, 0.5 * (p_ - 2.0));
  Vector a{0.0, 0.0};
  for (int c = 0; c < dim; ++c) a[c] = factor * xi[c];
  return a;
}

Matrix2 PLaplacianFlux::jacobian(const Point&, double, const Vector& xi, int dim,
                                 double regularization) const {
  Matrix2 jac{};
  if (p_ == 2.0) {
    for (int c = 0; c < dim; ++c) jac[c][c] = 1.0;
    return jac;
  }
  double s = dot(xi, xi, dim) + regularization;
  if (s <= 0.0) s = 1e-300;
  const double diag = std::pow(s, 0.5 * (p_ - 2.0));
  const double rank_one = (p_ - 2.0) * std::pow(s, 0.5 * (p_ - 4.0));
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) jac[r][c] = rank_one * xi[r] * xi[c];
    jac[r][r] += diag;
  }
  return jac;
}

WeightedPLaplacianFlux::WeightedPLaplacianFlux(double p, Coefficient coefficient, double c_min,
                                               double c_max)
    : base_(p), coefficient_(std::move(coefficient)), c_min_(c_min), c_max_(c_max) {
  if (!(c_min > 0.0) || !(c_max >= c_min)) {
    throw ParameterError("weighted p-Laplacian needs 0 < c_min <= c_max");
  }
}

Vector WeightedPLaplacianFlux::value(const Point& x, double t, const Vector& xi, int dim) const {
  const double c = coefficient_(x, t);
  Vector a = base_.value(x, t, xi, dim);
  for (int k = 0; k < dim; ++k) a[k] *= c;
  return a;
}

Matrix2 WeightedPLaplacianFlux::jacobian(const Point& x, double t, const Vector& xi, int dim,
                                         double regularization) const {
  const double c = coefficient_(x, t);
  Matrix2 jac = base_.jacobian(x, t, xi, dim, regularization);
  for (auto& row : jac) {
    for (double& v : row) v *= c;
  }
  return jac;
}

CallbackFlux::CallbackFlux(double p, Callback callback, std::string name)
    : p_(p), callback_(std::move(callback)), name_(std::move(name)) {
  if (!(p > 1.0)) throw ParameterError("flux exponent must exceed 1");
}

Vector CallbackFlux::value(const Point& x, double t, const Vector& xi, int dim) const {
  return callback_(x, t, xi, dim);
}

}  // namespace singpara
