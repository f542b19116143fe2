#include "singpara/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "singpara/errors.hpp"
#include "singpara/truncations.hpp"

namespace singpara {

ScalarField ScalarField::zero() {
  return from_formula("zero", [](const Point&, double) { return 0.0; });
}

ScalarField ScalarField::constant(double c) {
  std::ostringstream name;
  name << "constant(" << c << ")";
  return from_formula(name.str(), [c](const Point&, double) { return c; });
}

ScalarField ScalarField::from_formula(std::string name, SpaceTimeFunction f) {
  ScalarField s;
  s.name = std::move(name);
  s.formula = std::move(f);
  return s;
}

ScalarField ScalarField::from_samples(std::string name, GridFunction g) {
  ScalarField s;
  s.name = std::move(name);
  s.samples = std::make_shared<const GridFunction>(std::move(g));
  return s;
}

GridFunction ScalarField::sample_on(const Grid& grid) const {
  if (samples && samples->matches(grid)) return *samples;
  if (!formula) throw GridError("field '" + name + "' has no samples on this grid");
  return sample(grid, formula);
}

bool Problem::in_exponent_window() const {
  const double n = box.dim;
  return p > 2.0 - 1.0 / (n + 1.0) && p < n;
}

void Problem::validate(const Grid& grid) const {
  if (!(horizon > 0.0)) throw ParameterError("horizon T must be positive");
  if (!(p > 1.0)) throw ParameterError("exponent p must exceed 1");
  if (!flux) throw ParameterError("problem has no flux");
  if (std::abs(flux->exponent() - p) > 1e-12) {
    throw ParameterError("flux exponent does not match p");
  }
  const GridFunction f = source.sample_on(grid);
  for (double v : f.values()) {
    if (!(v >= 0.0)) throw DomainError("source f must be nonnegative");
  }
  const GridFunction u0 = initial.sample_on(grid);
  for (double v : u0.slice(0)) {
    if (!(v >= 0.0)) throw DomainError("initial datum must be nonnegative");
  }
}

double ValidationReport::get(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw ParameterError("validation report has no value '" + key + "'");
}

namespace {

std::string describe(const Vector& v, int dim) {
  std::ostringstream s;
  s << "(" << v[0];
  if (dim == 2) s << ", " << v[1];
  s << ")";
  return s.str();
}

}  // namespace

ValidationReport validate_structure(const Flux& flux, const Box& box, double horizon,
                                    int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw ParameterError("sample_count must be at least 1");
  const int dim = box.dim;
  const double p = flux.exponent();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto random_vector = [&] {
    Vector v{0.0, 0.0};
    for (int a = 0; a < dim; ++a) v[a] = normal(rng);
    double r = norm(v, dim);
    if (r == 0.0) {
      v[0] = 1.0;
      r = 1.0;
    }
    const double magnitude = std::pow(10.0, -3.0 + 6.0 * unit(rng));
    for (int a = 0; a < dim; ++a) v[a] *= magnitude / r;
    return v;
  };

  ValidationReport report;
  double alpha = std::numeric_limits<double>::infinity();
  double beta = 0.0;
  double monotone = std::numeric_limits<double>::infinity();
  for (int s = 0; s < sample_count; ++s) {
    Point x{0.0, 0.0};
    for (int a = 0; a < dim; ++a) x[a] = box.lo[a] + unit(rng) * box.side(a);
    const double t = unit(rng) * horizon;
    const Vector xi = random_vector();
    const Vector eta = random_vector();
    const Vector a_xi = flux.value(x, t, xi, dim);
    const Vector a_eta = flux.value(x, t, eta, dim);
    const double r = norm(xi, dim);

    const double coercive = dot(a_xi, xi, dim) / std::pow(r, p);
    alpha = std::min(alpha, coercive);
    beta = std::max(beta, norm(a_xi, dim) / std::pow(r, p - 1.0));
    Vector da{a_xi[0] - a_eta[0], a_xi[1] - a_eta[1]};
    Vector dx{xi[0] - eta[0], xi[1] - eta[1]};
    const double margin = dot(da, dx, dim);
    monotone = std::min(monotone, margin);

    if (report.passed && !(coercive > 0.0)) {
      report.passed = false;
      report.failed_condition = "coercivity";
      report.witness = "xi = " + describe(xi, dim) + ", a.xi/|xi|^p = " + std::to_string(coercive);
    }
    if (report.passed && !(margin > 0.0)) {
      report.passed = false;
      report.failed_condition = "strict_monotonicity";
      report.witness = "xi = " + describe(xi, dim) + ", eta = " + describe(eta, dim) +
                       ", margin = " + std::to_string(margin);
    }
  }
  if (report.passed && !std::isfinite(beta)) {
    report.passed = false;
    report.failed_condition = "growth";
    report.witness = "unbounded |a|/|xi|^{p-1}";
  }
  report.values = {{"alpha", alpha}, {"beta", beta}, {"monotonicity_margin", monotone}};
  return report;
}

ValidationReport validate_singularity(const SingularityProfile& h, int sample_count, double s_max) {
  if (sample_count < 2) throw ParameterError("sample_count must be at least 2");
  if (!(s_max > h.s0)) throw ParameterError("s_max must exceed s0");
  ValidationReport report;
  auto fail = [&](const std::string& condition, double s, double value) {
    if (!report.passed) return;
    report.passed = false;
    report.failed_condition = condition;
    std::ostringstream w;
    w << "s = " << s << ", h(s) = " << value;
    report.witness = w.str();
  };

  // Log-spaced samples on (0, s0] and on [s0, s_max].
  const double s_min = h.s0 * 1e-8;
  std::vector<double> head(static_cast<std::size_t>(sample_count));
  std::vector<double> tail(static_cast<std::size_t>(sample_count));
  for (int i = 0; i < sample_count; ++i) {
    const double u = static_cast<double>(i) / (sample_count - 1);
    head[i] = s_min * std::pow(h.s0 / s_min, u);
    tail[i] = h.s0 * std::pow(s_max / h.s0, u);
  }

  double envelope_ratio = 0.0;
  for (double s : head) {
    const double v = h(s);
    if (!std::isfinite(v) || v < 0.0) fail("finiteness", s, v);
    const double bound = h.bound_constant * std::pow(s, -h.gamma);
    envelope_ratio = std::max(envelope_ratio, v / bound);
    if (v > bound * (1.0 + 1e-12)) fail("envelope", s, v);
  }
  double tail_max = 0.0;
  for (double s : tail) {
    const double v = h(s);
    if (!std::isfinite(v) || v < 0.0) fail("finiteness", s, v);
    tail_max = std::max(tail_max, v);
  }
  if (!h.sup_tail) {
    fail("tail_bound_undeclared", h.s0, h(h.s0));
  } else if (tail_max > *h.sup_tail * (1.0 + 1e-12)) {
    for (double s : tail) {
      if (h(s) > *h.sup_tail * (1.0 + 1e-12)) {
        fail("tail_bound", s, h(s));
        break;
      }
    }
  }
  const double near_zero = h.singular_at_zero ? h(head.front()) : h.value_at_zero;
  if (!(near_zero > 0.0)) fail("nonzero_at_origin", 0.0, near_zero);

  // Continuity proxy: largest jump between neighbouring samples, relative to
  // the local scale, on the compact part [s0 * 1e-3, s_max].
  double modulus = 0.0;
  std::vector<double> all(head.begin(), head.end());
  all.insert(all.end(), tail.begin() + 1, tail.end());
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    if (all[i] < h.s0 * 1e-3) continue;
    const double a = h(all[i]);
    const double b = h(all[i + 1]);
    modulus = std::max(modulus, std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b))));
  }

  if (h.nonincreasing) {
    double previous = std::numeric_limits<double>::infinity();
    for (double s : all) {
      const double v = h(s);
      if (v > previous * (1.0 + 1e-14)) {
        fail("monotonicity", s, v);
        break;
      }
      previous = v;
    }
  }
  report.values = {{"envelope_ratio", envelope_ratio},
                   {"tail_max", tail_max},
                   {"continuity_modulus", modulus}};
  return report;
}

ConjugateExponents conjugate_exponents(double r, int n) {
  if (!(r > 1.0)) throw ParameterError("exponent must exceed 1");
  if (n < 1) throw ParameterError("dimension must be positive");
  ConjugateExponents c;
  c.holder = r / (r - 1.0);
  if (r < n) c.sobolev = r * n / (n - r);
  return c;
}

SourceClass classify_source_regularity(const Problem& problem, double theta, const Grid& grid) {
  if (theta < 0.0) throw ParameterError("theta must be nonnegative");
  const GridFunction f = problem.source.sample_on(grid);
  SourceClass c;
  auto l1 = [&] {
    double s = 0.0;
    for (int m = 1; m <= grid.time_steps(); ++m) {
      const auto slice = f.slice(m);
      const auto w = grid.weights();
      for (std::size_t i = 0; i < slice.size(); ++i) s += w[i] * std::abs(slice[i]);
    }
    return grid.dt() * s;
  };
  if (theta >= 1.0) {
    c.label = "l1";
    c.norm = l1();
    c.eligible = std::isfinite(c.norm);
    return c;
  }
  const ConjugateExponents ce = conjugate_exponents(problem.p, grid.dim());
  if (!ce.sobolev) {
    c.label = "unavailable";
    c.norm = l1();
    c.eligible = false;
    c.note = "p >= N: Sobolev exponent undefined, only the theta >= 1 branch applies";
    return c;
  }
  const double s = *ce.sobolev / (1.0 - theta);
  const double r = s / (s - 1.0);
  const double q = problem.p / (problem.p - 1.0 + theta);
  double total = 0.0;
  for (int m = 1; m <= grid.time_steps(); ++m) {
    const auto slice = f.slice(m);
    const auto w = grid.weights();
    double space = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i) space += w[i] * std::pow(std::abs(slice[i]), r);
    total += grid.dt() * std::pow(std::pow(space, 1.0 / r), q);
  }
  c.label = "finite_energy";
  c.norm = std::pow(total, 1.0 / q);
  c.eligible = std::isfinite(c.norm);
  std::ostringstream note;
  note << "L^" << q << "(0,T; L^" << r << ")";
  c.note = note.str();
  return c;
}

ApproximateProblem build_approximation(const Problem& problem, int n, const Grid& grid,
                                       const MollifierConfig& mollifier) {
  if (n < 1) throw ParameterError("level n must be at least 1");
  if (grid.box().dim != problem.box.dim) throw GridError("grid and problem dimensions differ");
  ApproximateProblem ap{n, grid, problem.flux, problem.singularity, {}, {}, {}, {}};
  const double level = n;

  ap.source = problem.source.sample_on(grid);
  for (double& v : ap.source.values()) v = truncate(level, v);

  const GridFunction u0 = problem.initial.sample_on(grid);
  ap.initial.assign(u0.slice(0).begin(), u0.slice(0).end());
  for (double& v : ap.initial) v = truncate(level, v);
  for (std::size_t node : grid.boundary()) ap.initial[node] = 0.0;

  ap.widths = mollifier_widths(n, grid, mollifier);
  ap.measure = mollify(problem.measure, n, grid, mollifier);
  return ap;
}

double mass_bound_constant(const Problem& problem, const Grid& grid) {
  const SingularityProfile& h = problem.singularity;
  if (!h.sup_tail) throw ParameterError("singularity profile has no tail bound");
  const GridFunction f = problem.source.sample_on(grid);
  const double f_mass = integrate_space_time(grid, f);
  const GridFunction u0 = problem.initial.sample_on(grid);
  std::vector<double> primitive(grid.node_count());
  const auto initial = u0.slice(0);
  for (std::size_t i = 0; i < primitive.size(); ++i) {
    primitive[i] = truncation_primitive(1.0, h.sigma(), initial[i]);
  }
  return f_mass * (h.bound_constant + *h.sup_tail) + problem.measure.total_variation() +
         grid.box().volume() + integrate_space(grid, primitive);
}

}  // namespace singpara
