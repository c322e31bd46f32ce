#include <benchmark/benchmark.h>

#include <random>

#include "oblique/oblique.hpp"

namespace {

using namespace oblique;

Matrix gaussian(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

struct Instance {
  Subspace w;
  Subspace v;
  FiniteFrame frame;
};

Instance make_instance(Index n, Index d, Index count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Matrix bw = gaussian(rng, n, d);
  Subspace w = orthonormal_basis(bw);
  Subspace v = orthonormal_basis(w.basis() + 0.3 * gaussian(rng, n, d));
  FiniteFrame f(w.basis() * gaussian(rng, d, count), w);
  return {w, v, f};
}

void BM_CanonicalDual(benchmark::State& state) {
  const Index n = state.range(0);
  const Instance in = make_instance(n, n / 2, 2 * n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(canonical_oblique_dual(in.frame, in.v));
}
BENCHMARK(BM_CanonicalDual)->Arg(8)->Arg(32)->Arg(128);

void BM_DualPotential(benchmark::State& state) {
  const Index n = state.range(0);
  const Instance in = make_instance(n, n / 2, 2 * n, 2);
  const ObliqueDualPair pair = canonical_oblique_dual(in.frame, in.v);
  for (auto _ : state) benchmark::DoNotOptimize(dual_p_potential(pair, 4.0));
}
BENCHMARK(BM_DualPotential)->Arg(8)->Arg(32)->Arg(128);

void BM_ExactW2(benchmark::State& state) {
  const Index m = state.range(0);
  std::mt19937_64 rng(3);
  const DiscreteMeasure a = DiscreteMeasure::uniform(gaussian(rng, 3, m));
  const DiscreteMeasure b = DiscreteMeasure::uniform(gaussian(rng, 3, m));
  for (auto _ : state) benchmark::DoNotOptimize(exact_w2(a, b));
}
BENCHMARK(BM_ExactW2)->Arg(4)->Arg(16)->Arg(64);

void BM_Minimize(benchmark::State& state) {
  const Instance in = make_instance(4, 2, static_cast<Index>(state.range(0)), 4);
  OptimizerOptions o;
  o.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(minimize_dual_potential(in.frame, in.v, 4.0, o));
}
BENCHMARK(BM_Minimize)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
