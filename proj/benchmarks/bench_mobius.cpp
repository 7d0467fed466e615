#include <benchmark/benchmark.h>

#include "posrate/catalog.hpp"
#include "posrate/incidence.hpp"

using namespace posrate;

namespace {

Poset boolean_lattice(int m) { return catalog_build("boolean", {{"M", std::to_string(m)}}).poset; }

// A fresh poset per iteration so the memo starts empty.
void BM_MobiusRows(benchmark::State& state) {
  const auto base = boolean_lattice(static_cast<int>(state.range(0)));
  const auto covers = base.cover_pairs();
  for (auto _ : state) {
    const auto p = Poset::build(base.size(), covers);
    for (ElementId x = 0; x < p.size(); ++x) benchmark::DoNotOptimize(p.mobius_row(x).data());
  }
  state.SetComplexityN(static_cast<long>(base.size()));
}
BENCHMARK(BM_MobiusRows)->DenseRange(4, 8, 2);

void BM_Cumulative(benchmark::State& state) {
  const auto p = catalog_build("kary_tree", {{"k", "2"}, {"depth", std::to_string(state.range(0))}}).poset;
  for (auto _ : state) benchmark::DoNotOptimize(cumulative(p, 6));
}
BENCHMARK(BM_Cumulative)->DenseRange(4, 8, 2);

void BM_MobiusInversion(benchmark::State& state) {
  const auto p = boolean_lattice(static_cast<int>(state.range(0)));
  const std::vector<Rational> f(p.size(), Rational(1, 3));
  const auto g = lower_op<Rational>(p, f);
  for (auto _ : state) benchmark::DoNotOptimize(mobius_invert_lower<Rational>(p, g));
}
BENCHMARK(BM_MobiusInversion)->DenseRange(4, 8, 2);

}  // namespace
