#include <benchmark/benchmark.h>

#include <memory>

#include "gfe/bench.hpp"
#include "gfe/interpolation.hpp"

using namespace gfe;

namespace {

GfeFunction p2_interpolant(int order, int level) {
  const ProblemSpec& p = find_problem("P2");
  return GfeFunction::interpolate(level_mesh(p, level), order, p.manifold,
                                  [&](const Coord& x) { return p.exact(x, 0).value; });
}

// one Frechet mean per iteration
void BM_GeodesicInterpolate(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const GfeFunction u = p2_interpolant(order, 0);
  Coord xi(2);
  xi << 0.2, 0.3;
  std::size_t e = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(u.evaluate(e++ % u.mesh().num_elements(), xi));
  }
}
BENCHMARK(BM_GeodesicInterpolate)->Arg(1)->Arg(2);

// value, differential and the derivative machinery at one point
void BM_LocalInterpolant(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const GfeFunction u = p2_interpolant(order, 0);
  Coord xi(2);
  xi << 0.2, 0.3;
  std::size_t e = 0;
  for (auto _ : state) {
    const LocalInterpolant li = LocalInterpolant::at(u, e++ % u.mesh().num_elements(), xi);
    benchmark::DoNotOptimize(li.differential());
  }
}
BENCHMARK(BM_LocalInterpolant)->Arg(1)->Arg(2);

void BM_SecondDifferential(benchmark::State& state) {
  const GfeFunction u = p2_interpolant(2, 0);
  Coord xi(2);
  xi << 0.2, 0.3;
  const LocalInterpolant li = LocalInterpolant::at(u, 0, xi);
  for (auto _ : state) benchmark::DoNotOptimize(li.second_differential());
}
BENCHMARK(BM_SecondDifferential);

}  // namespace

BENCHMARK_MAIN();
