#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "singpara/flux.hpp"
#include "singpara/grid.hpp"
#include "singpara/problem.hpp"
#include "singpara/singularity.hpp"
#include "singpara/stepper.hpp"

using namespace singpara;

namespace {

Problem make(int dim, double p) {
  Problem pr;
  pr.box = Box{dim, {0, 0}, {1, 1}};
  pr.p = p;
  pr.flux = std::make_shared<PLaplacianFlux>(p);
  pr.singularity = power_profile(0.5);
  pr.source = ScalarField::constant(1);
  pr.initial = ScalarField::zero();
  pr.measure = RadonMeasure(pr.box, 1);
  return pr;
}

void BM_FluxDivergence(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int nodes = static_cast<int>(state.range(1));
  const Grid g = build_grid(Box{dim, {0, 0}, {1, 1}}, 1, nodes, 1);
  const PLaplacianFlux flux(3);
  std::vector<double> u(g.node_count());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Point x = g.coordinate(i);
    u[i] = std::sin(M_PI * x[0]) * (dim == 2 ? std::sin(M_PI * x[1]) : 1.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(flux_divergence(g, flux, u, 0.5));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.node_count()));
}
BENCHMARK(BM_FluxDivergence)->Args({1, 1025})->Args({2, 129});

void BM_EllipticStep(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int nodes = static_cast<int>(state.range(1));
  const Problem pr = make(dim, 1.8);
  const Grid g = build_grid(pr.box, 1, nodes, 16);
  const auto ap = build_approximation(pr, 16, g);
  const std::vector<double> frozen(g.node_count(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(elliptic_step(ap, ap.initial, 1, frozen, SolverConfig{}));
}
BENCHMARK(BM_EllipticStep)->Args({1, 257})->Args({2, 33})->Unit(benchmark::kMillisecond);

void BM_Evolve(benchmark::State& state) {
  const int nodes = static_cast<int>(state.range(0));
  const Problem pr = make(1, 2);
  const Grid g = build_grid(pr.box, 1, nodes, nodes - 1);
  const auto ap = build_approximation(pr, 64, g);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(ap, SolverConfig{}));
}
BENCHMARK(BM_Evolve)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
