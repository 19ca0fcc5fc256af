#include <benchmark/benchmark.h>

#include "gfe/bench.hpp"
#include "gfe/energy.hpp"
#include "gfe/solver.hpp"

using namespace gfe;

namespace {

GfeFunction p2_interpolant(int order, int level) {
  const ProblemSpec& p = find_problem("P2");
  return GfeFunction::interpolate(level_mesh(p, level), order, p.manifold,
                                  [&](const Coord& x) { return p.exact(x, 0).value; });
}

void BM_Energy(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const GfeFunction u = p2_interpolant(order, static_cast<int>(state.range(1)));
  const QuadratureRule quad = quadrature_for(2, energy_quadrature_degree(order));
  for (auto _ : state) benchmark::DoNotOptimize(harmonic_energy(u, quad).total);
  state.counters["elements"] = static_cast<double>(u.mesh().num_elements());
}
BENCHMARK(BM_Energy)->ArgsProduct({{1, 2}, {0, 2}})->Unit(benchmark::kMillisecond);

void BM_EnergyAndGradient(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const GfeFunction u = p2_interpolant(order, static_cast<int>(state.range(1)));
  const QuadratureRule quad = quadrature_for(2, energy_quadrature_degree(order));
  for (auto _ : state) benchmark::DoNotOptimize(energy_and_gradient(u, quad).energy.total);
  state.counters["elements"] = static_cast<double>(u.mesh().num_elements());
}
BENCHMARK(BM_EnergyAndGradient)->ArgsProduct({{1, 2}, {0, 2}})->Unit(benchmark::kMillisecond);

// full solve from a perturbed start on the k = 8 mesh
void BM_Solve(benchmark::State& state) {
  RunConfig c;
  c.problem = "P2";
  c.order = static_cast<int>(state.range(0));
  c.levels = 2;
  c.seed = 1;
  c.perturbation = 0.02;
  for (auto _ : state) benchmark::DoNotOptimize(run(c).all_converged);
}
BENCHMARK(BM_Solve)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
