#include <gtest/gtest.h>

#include <cmath>

#include "singpara/errors.hpp"
#include "singpara/measures.hpp"

using namespace singpara;

namespace {
Box unit(int dim) { return Box{dim, {0, 0}, {1, 1}}; }
}  // namespace

TEST(RadonMeasure, PairingWithAtomsAndDensity) {
  const Grid g = build_grid(unit(1), 1, 65, 64);
  RadonMeasure mu(unit(1), 1);
  EXPECT_EQ(pair(mu, [](const Point&, double) { return 1.0; }, g), 0.0);
  mu.add_atom({0.3, 0}, 0.4, 1.0);
  EXPECT_DOUBLE_EQ(pair(mu, [](const Point&, double) { return 1.0; }, g), 1.0);
  RadonMeasure d(unit(1), 1);
  d.set_density([](const Point&, double) { return 1.0; }, g);
  EXPECT_NEAR(pair(d, [](const Point&, double t) { return t; }, g), 0.5, 1e-2);
  EXPECT_NEAR(d.total_variation(), 1.0, 1e-12);
}

TEST(RadonMeasure, RejectsAtomsOutsideTheCylinder) {
  RadonMeasure mu(unit(1), 1);
  EXPECT_THROW(mu.add_atom({0.0, 0}, 0.5, 1), DomainError);
  EXPECT_THROW(mu.add_atom({0.5, 0}, 1.0, 1), DomainError);
  EXPECT_THROW(mu.add_atom({0.5, 0}, 0.5, -1), ParameterError);
}

TEST(Mollify, PreservesMassAndSign) {
  const Grid g = build_grid(unit(1), 1, 129, 128);
  RadonMeasure zero(unit(1), 1);
  for (double v : mollify(zero, 4, g).values()) EXPECT_EQ(v, 0.0);

  RadonMeasure mu(unit(1), 1);
  mu.add_atom({0.5, 0}, 0.5, 1.0);
  for (int n : {1, 4, 16, 64}) {
    const GridFunction m = mollify(mu, n, g);
    EXPECT_NEAR(integrate_space_time(g, m), 1.0, 1e-8) << "n=" << n;
    for (double v : m.values()) EXPECT_GE(v, 0.0);
  }
  mu.add_atom({0.05, 0}, 0.97, 2.0);  // close to the boundary and the horizon
  EXPECT_NEAR(integrate_space_time(g, mollify(mu, 4, g)), 3.0, 1e-8);
}

TEST(Mollify, TwoDimensionalMass) {
  const Grid g = build_grid(unit(2), 1, 33, 32);
  RadonMeasure mu(unit(2), 1);
  mu.add_atom({0.5, 0.5}, 0.5, 1.0);
  EXPECT_NEAR(integrate_space_time(g, mollify(mu, 4, g)), 1.0, 1e-8);
}

TEST(Mollify, ClampAndStrictMode) {
  const Grid g = build_grid(unit(1), 1, 33, 32);
  const auto w = mollifier_widths(64, g);
  EXPECT_TRUE(w.clamped);
  EXPECT_GE(w.spatial, 2 * g.spacing());
  EXPECT_GE(w.temporal, 2 * g.dt());
  RadonMeasure mu(unit(1), 1);
  mu.add_atom({0.5, 0}, 0.5, 1.0);
  EXPECT_THROW(mollify(mu, 64, g, MollifierConfig{0.0, false}), GridError);
}

TEST(NarrowConvergence, MassExactAndErrorsShrink) {
  const Grid g = build_grid(unit(1), 1, 257, 256);
  RadonMeasure mu(unit(1), 1);
  mu.add_atom({0.5, 0}, 0.5, 1.0);
  std::vector<SpaceTimeFunction> panel{
      [](const Point&, double) { return 1.0; },
      [](const Point& x, double t) { return std::sin(M_PI * x[0]) * std::cos(t); }};
  const auto rows = narrow_convergence_report(mu, {1, 2, 4, 8}, panel, g);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    if (r.test_id == 0) EXPECT_LE(r.error, 1e-8);
  }
  std::vector<double> errs;
  for (const auto& r : rows) {
    if (r.test_id == 1) errs.push_back(r.error);
  }
  for (std::size_t j = 1; j < errs.size(); ++j) EXPECT_LT(errs[j], errs[j - 1]);
  RadonMeasure zero(unit(1), 1);
  for (const auto& r : narrow_convergence_report(zero, {1, 2}, panel, g)) EXPECT_EQ(r.error, 0.0);
}
