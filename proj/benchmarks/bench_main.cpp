#include <random>

#include <benchmark/benchmark.h>

#include "heavyset/dimension.hpp"
#include "heavyset/heavy.hpp"

using namespace heavyset;

namespace {

const GroupSpace kT1 = GroupSpace::torus(1);

void BM_CompareQuadratic(benchmark::State& state) {
  const ExactScalar x = ExactScalar::parse("(sqrt5-1)/2");
  const ExactScalar y = ExactScalar::parse("832040/1346269");
  for (auto _ : state) benchmark::DoNotOptimize(x < y);
}
BENCHMARK(BM_CompareQuadratic);

void BM_LevelComparator(benchmark::State& state) {
  const LevelComparator c(ExactScalar::parse("(sqrt5-1)/2"));
  std::uint64_t steps = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.sign(steps * 5 / 8, steps));
    ++steps;
  }
}
BENCHMARK(BM_LevelComparator);

void BM_OrbitLowered(benchmark::State& state) {
  const TargetSet a = TargetSet::intervals(kT1, {{0, ExactScalar::parse("(sqrt5-1)/2")}});
  const OrbitEngine engine(a, kT1.torus_point({ExactScalar::parse("sqrt5/7")}));
  const GroupPoint x = kT1.torus_point({ExactScalar::fraction(1, 3)});
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(engine.chi(x, n));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OrbitLowered)->Arg(1 << 10)->Arg(1 << 16);

void BM_OrbitGeneric(benchmark::State& state) {
  const TargetSet a = TargetSet::intervals(kT1, {{0, ExactScalar::parse("(sqrt5-1)/2")}});
  const OrbitEngine engine(a, kT1.torus_point({ExactScalar::parse("sqrt5/7")}));
  const GroupPoint x = kT1.torus_point({ExactScalar::fraction(1, 3)});
  const LevelComparator never(0);  // level 0: sums never drop below zero, full length
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(engine.first_failure_generic(x, n, never));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OrbitGeneric)->Arg(1 << 10);

void BM_SurvivalGrid(benchmark::State& state) {
  const TargetSet a = TargetSet::intervals(kT1, {{0, ExactScalar::fraction(1, 2)}});
  const OrbitEngine engine(a, kT1.torus_point({ExactScalar::parse("sqrt2 - 1")}));
  const LevelComparator level(ExactScalar::fraction(1, 2));
  for (auto _ : state) benchmark::DoNotOptimize(engine.survival_grid(100000, 1000, level));
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_SurvivalGrid);

void BM_PackingExact1d(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<std::uint64_t> idx;
  const std::uint64_t r = 1000000;
  for (std::uint64_t i = 0; i < r; ++i) {
    if (rng() % 10 == 0) idx.push_back(i);
  }
  for (auto _ : state) benchmark::DoNotOptimize(packing_number_grid(kT1, r, idx, Rational(1, 10000)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(idx.size()));
}
BENCHMARK(BM_PackingExact1d);

void BM_PackingGreedy2d(benchmark::State& state) {
  const GroupSpace t2 = GroupSpace::torus(2);
  std::mt19937_64 rng(2);
  std::vector<std::uint64_t> idx;
  const std::uint64_t r = 1000;
  for (std::uint64_t i = 0; i < r * r; ++i) {
    if (rng() % 20 == 0) idx.push_back(i);
  }
  for (auto _ : state) benchmark::DoNotOptimize(packing_number_grid(t2, r, idx, Rational(1, 100)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(idx.size()));
}
BENCHMARK(BM_PackingGreedy2d);

}  // namespace

BENCHMARK_MAIN();
