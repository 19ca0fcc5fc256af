#include <benchmark/benchmark.h>

#include <random>

#include "gfe/manifold.hpp"

using namespace gfe;

namespace {

Manifold by_index(int i) {
  switch (i) {
    case 0: return Manifold::sphere();
    case 1: return Manifold::hyperbolic();
    default: return Manifold::euclidean(3);
  }
}

struct Pair {
  Point p, q;
  Vector v;
};

std::vector<Pair> pairs(const Manifold& m, int n) {
  std::mt19937_64 rng(1);
  std::vector<Pair> out;
  for (int i = 0; i < n; ++i) {
    const Point p = m.random_point_near(m.origin(), rng, 1.0);
    out.push_back({p, m.random_point_near(p, rng, 0.5), m.random_tangent(p, rng, 0.5)});
  }
  return out;
}

void BM_ExpLog(benchmark::State& state) {
  const Manifold m = by_index(static_cast<int>(state.range(0)));
  const auto data = pairs(m, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    const Pair& d = data[i++ % data.size()];
    benchmark::DoNotOptimize(m.log(d.p, m.exp(d.p, d.v)));
  }
  state.SetLabel(m.name());
}
BENCHMARK(BM_ExpLog)->DenseRange(0, 2);

void BM_LogDifferentials(benchmark::State& state) {
  const Manifold m = by_index(static_cast<int>(state.range(0)));
  const auto data = pairs(m, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    const Pair& d = data[i++ % data.size()];
    benchmark::DoNotOptimize(m.dlog_base(d.p, d.q));
    benchmark::DoNotOptimize(m.dlog_target(d.p, d.q));
  }
  state.SetLabel(m.name());
}
BENCHMARK(BM_LogDifferentials)->DenseRange(0, 2);

void BM_ParallelTransport(benchmark::State& state) {
  const Manifold m = by_index(static_cast<int>(state.range(0)));
  const auto data = pairs(m, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    const Pair& d = data[i++ % data.size()];
    benchmark::DoNotOptimize(m.parallel_transport(d.p, d.q, d.v));
  }
  state.SetLabel(m.name());
}
BENCHMARK(BM_ParallelTransport)->DenseRange(0, 2);

}  // namespace

BENCHMARK_MAIN();
