#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "singpara/errors.hpp"
#include "singpara/flux.hpp"
#include "singpara/problem.hpp"
#include "singpara/singularity.hpp"
#include "singpara/stepper.hpp"

using namespace singpara;

namespace {

Problem make(int dim, double p, SingularityProfile h, ScalarField f, ScalarField u0) {
  Problem pr;
  pr.box = Box{dim, {0, 0}, {1, 1}};
  pr.horizon = 1;
  pr.p = p;
  pr.flux = std::make_shared<PLaplacianFlux>(p);
  pr.singularity = std::move(h);
  pr.source = std::move(f);
  pr.initial = std::move(u0);
  pr.measure = RadonMeasure(pr.box, 1);
  return pr;
}

ScalarField sine() {
  return ScalarField::from_formula("sine", [](const Point& x, double) { return std::sin(M_PI * x[0]); });
}

}  // namespace

TEST(EllipticStep, ZeroDataGivesZero) {
  const Problem pr = make(1, 3, power_profile(0.5), ScalarField::zero(), ScalarField::zero());
  const Grid g = build_grid(pr.box, 1, 17, 8);
  const auto ap = build_approximation(pr, 4, g);
  std::vector<double> zero(g.node_count(), 0.0);
  for (double v : elliptic_step(ap, zero, 1, zero, SolverConfig{})) EXPECT_EQ(v, 0.0);
}

TEST(EllipticStep, LinearCaseMatchesDenseSolve) {
  const Problem pr = make(2, 2, constant_profile(1), ScalarField::constant(1), ScalarField::zero());
  const Grid g = build_grid(pr.box, 1, 9, 4);
  const auto ap = build_approximation(pr, 4, g);
  std::vector<double> prev(g.node_count(), 0.0);
  for (std::size_t i : g.interior()) prev[i] = 0.1 * static_cast<double>(i % 7);
  const auto w = elliptic_step(ap, prev, 1, prev, SolverConfig{});

  const auto interior = g.interior();
  const int n = static_cast<int>(interior.size());
  std::vector<int> id(g.node_count(), -1);
  for (int k = 0; k < n; ++k) id[interior[k]] = k;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  const double h2 = g.spacing() * g.spacing();
  for (int k = 0; k < n; ++k) {
    const std::size_t node = interior[k];
    A(k, k) = 1 / g.dt() + 4 / h2;
    for (std::size_t q : {node - 1, node + 1, node - 9, node + 9}) {
      if (id[q] >= 0) A(k, id[q]) = -1 / h2;
    }
    b(k) = prev[node] / g.dt() + 1.0;
  }
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  for (int k = 0; k < n; ++k) EXPECT_NEAR(w[interior[k]], x(k), 1e-10);
}

TEST(EllipticStep, NewtonRecoversManufacturedState) {
  // p = 3: build the source so that w*(x) = x(1 - x) is the exact discrete root.
  const Grid g = build_grid(Box{1, {0, 0}, {1, 1}}, 1, 33, 8);
  std::vector<double> target(g.node_count());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double x = g.coordinate(i)[0];
    target[i] = x * (1 - x);
  }
  const auto div = flux_divergence(g, PLaplacianFlux(3), target, g.time(1));
  GridFunction f = GridFunction::zeros(g);
  for (std::size_t i : g.interior()) f.at(1, i) = target[i] / g.dt() + div[i];
  const Problem pr = make(1, 3, constant_profile(1), ScalarField::from_samples("manufactured", f),
                          ScalarField::zero());
  const auto ap = build_approximation(pr, 1000, g);
  std::vector<double> zero(g.node_count(), 0.0);
  SolverConfig cfg;
  NewtonStats stats;
  const auto w = elliptic_step(ap, zero, 1, zero, cfg, &stats);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], target[i], 1e-9);
  EXPECT_LE(stats.residual, 10 * cfg.newton_tol * stats.scale);
}

TEST(PicardFixedPoint, ConstantSingularityConvergesImmediately) {
  const Problem pr = make(1, 2, constant_profile(2), ScalarField::constant(1), sine());
  const Grid g = build_grid(pr.box, 1, 33, 16);
  const auto ap = build_approximation(pr, 8, g);
  const auto res = picard_fixed_point(ap, ap.initial, 1, SolverConfig{});
  EXPECT_LE(res.telemetry.picard_iterations, 2);
}

TEST(PicardFixedPoint, SingularDistancesContract) {
  const Problem pr = make(1, 2, power_profile(0.5), ScalarField::constant(1), ScalarField::zero());
  const Grid g = build_grid(pr.box, 1, 65, 64);
  const auto ap = build_approximation(pr, 16, g);
  SolverConfig cfg;
  cfg.accelerate = false;
  cfg.record_distances = true;
  const auto res = picard_fixed_point(ap, ap.initial, 1, cfg);
  const auto& d = res.telemetry.distances;
  ASSERT_GE(d.size(), 3u);
  for (std::size_t j = 2; j < d.size(); ++j) {
    if (d[j - 1] > 1e-13) EXPECT_LT(d[j], d[j - 1]);
  }
}

TEST(Evolve, ZeroDataStaysZero) {
  const Problem pr = make(1, 1.8, power_profile(0.5), ScalarField::zero(), ScalarField::zero());
  const Grid g = build_grid(pr.box, 1, 33, 16);
  const auto r = evolve(build_approximation(pr, 4, g), SolverConfig{});
  for (double v : r.solution.values()) EXPECT_EQ(v, 0.0);
}

TEST(Evolve, HeatOracleErrorDecays) {
  const Problem pr = make(1, 2, constant_profile(1), ScalarField::zero(), sine());
  double previous = INFINITY;
  for (int nodes : {17, 33, 65}) {
    const int steps = (nodes - 1) * (nodes - 1) / 10;
    Problem q = pr;
    q.horizon = 0.1;
    q.measure = RadonMeasure(q.box, 0.1);
    const Grid g = build_grid(q.box, 0.1, nodes, steps);
    const auto r = evolve(build_approximation(q, 1, g), SolverConfig{});
    double err = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const double e = r.solution.at(steps, i) - std::exp(-M_PI * M_PI * 0.1) * std::sin(M_PI * g.coordinate(i)[0]);
      err = std::max(err, std::abs(e));
    }
    if (std::isfinite(previous)) EXPECT_NEAR(previous / err, 4.0, 0.4);
    previous = err;
  }
}

TEST(Evolve, SingularRunIsPositiveAndBounded) {
  const Problem pr = make(1, 2, power_profile(0.5), ScalarField::constant(1), ScalarField::zero());
  const Grid g = build_grid(pr.box, 1, 65, 64);
  const auto r = evolve(build_approximation(pr, 16, g), SolverConfig{});
  double sup = 0;
  for (int m = 1; m <= g.time_steps(); ++m) {
    for (std::size_t i : g.interior()) EXPECT_GT(r.solution.at(m, i), 0.0);
    sup = std::max(sup, integrate_space(g, r.solution.slice(m)));
  }
  EXPECT_LE(sup, mass_bound_constant(pr, g));
}

TEST(Evolve, TwoDimensionalDegenerateCase) {
  const Problem pr = make(2, 3, power_profile(0.5), ScalarField::constant(1), ScalarField::zero());
  const Grid g = build_grid(pr.box, 0.25, 13, 8);
  Problem q = pr;
  q.horizon = 0.25;
  q.measure = RadonMeasure(q.box, 0.25);
  const auto r = evolve(build_approximation(q, 8, g), SolverConfig{});
  for (int m = 1; m <= g.time_steps(); ++m) {
    for (std::size_t i : g.interior()) EXPECT_GT(r.solution.at(m, i), 0.0);
  }
}

TEST(SolverConfig, JsonRoundTripAndValidation) {
  SolverConfig c;
  c.picard_max = 17;
  c.flux_regularization = 3e-9;
  const SolverConfig back = SolverConfig::from_json(c.to_json());
  EXPECT_EQ(back.picard_max, 17);
  EXPECT_EQ(back.flux_regularization, 3e-9);
  c.newton_tol = -1;
  EXPECT_THROW(c.validate(), ParameterError);
}
