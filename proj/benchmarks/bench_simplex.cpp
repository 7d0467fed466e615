#include <benchmark/benchmark.h>

#include "posrate/finder.hpp"
#include "posrate/trees.hpp"

using namespace posrate;

namespace {

const Rational kEps(1, 1000000000);

void BM_TreeFeasibilityFloat(benchmark::State& state) {
  const auto t = materialize(TreeRule::kary(2), static_cast<unsigned>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(constant_rate_feasible_truncated(t.poset, Rational(1, 2), kEps, false));
}
BENCHMARK(BM_TreeFeasibilityFloat)->DenseRange(3, 6, 1);

void BM_TreeFeasibilityExact(benchmark::State& state) {
  const auto t = materialize(TreeRule::kary(2), static_cast<unsigned>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(constant_rate_feasible_truncated(t.poset, Rational(1, 2), kEps, true));
}
BENCHMARK(BM_TreeFeasibilityExact)->DenseRange(2, 4, 1);

void BM_ChainGrid(benchmark::State& state) {
  const auto chain = make_chain(static_cast<std::size_t>(state.range(0)));
  const auto grid = default_alpha_grid();
  for (auto _ : state) benchmark::DoNotOptimize(alpha_grid_search(chain, grid, kEps, false, 1));
}
BENCHMARK(BM_ChainGrid)->Arg(5)->Arg(20);

}  // namespace
