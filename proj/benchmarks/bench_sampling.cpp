#include <benchmark/benchmark.h>

#include "posrate/catalog.hpp"
#include "posrate/ladder.hpp"
#include "posrate/trees.hpp"

using namespace posrate;

namespace {

void BM_TreeLawSample(benchmark::State& state) {
  const auto law = TreeLaw::constant_rate(TreeRule::kary(2), Rational(1, 2));
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(law.sample(rng));
}
BENCHMARK(BM_TreeLawSample);

void BM_LadderMarkov(benchmark::State& state) {
  const auto law = TreeLaw::constant_rate(TreeRule::kary(2), Rational(1, 2));
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ladder_markov_sample(law, n, rng));
}
BENCHMARK(BM_LadderMarkov)->Arg(3)->Arg(10);

void BM_ThinSample(benchmark::State& state) {
  const auto law = TreeLaw::constant_rate(TreeRule::kary(2), Rational(1, 2));
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(thin_sample(law, 0.5, rng));
}
BENCHMARK(BM_ThinSample);

void BM_FiniteLadderFromIid(benchmark::State& state) {
  const auto item = catalog_build("boolean", {{"M", "4"}});
  const auto dist = FiniteDist::from_exact(item.poset, *item.pdf);
  Rng rng(4);
  for (auto _ : state) {
    const auto iid = sample_iid(dist, 400, rng);
    benchmark::DoNotOptimize(ladder_from_iid(item.poset, iid, 3));
  }
}
BENCHMARK(BM_FiniteLadderFromIid);

void BM_ReplicateCounts(benchmark::State& state) {
  const auto law = TreeLaw::constant_rate(TreeRule::kary(2), Rational(1, 2));
  const auto tree = materialize(TreeRule::kary(2), 4);
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(replicate_counts<NodePath>(
        10000, SeedSpec{5}, threads, tree.paths.size() + 1, [&](Rng& rng) { return law.sample(rng); },
        [&](const NodePath& v) { return tree_bin(tree, v); }));
  }
}
BENCHMARK(BM_ReplicateCounts)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
