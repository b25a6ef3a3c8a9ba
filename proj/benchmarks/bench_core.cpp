#include <benchmark/benchmark.h>

#include <random>

#include "esc/bradford.hpp"
#include "esc/filter.hpp"
#include "esc/residue.hpp"

using namespace esc;

static void BM_IsPrime64(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<u64> xs(4096);
  for (auto& x : xs) x = rng() | 1;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(is_prime(xs[i++ & 4095]));
}
BENCHMARK(BM_IsPrime64);

static void BM_Factorize(benchmark::State& state) {
  std::mt19937_64 rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(factorize(rng() >> 4 | 2));
}
BENCHMARK(BM_Factorize);

static void BM_DivisorsOfSquare(benchmark::State& state) {
  u64 x = static_cast<u64>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(divisors_of_square(x));
    if (++x == 2 * static_cast<u64>(state.range(0))) x = state.range(0);
  }
}
BENCHMARK(BM_DivisorsOfSquare)->Arg(1000)->Arg(1000000)->Arg(1000000000);

static void BM_CountSolutions(benchmark::State& state) {
  const auto primes = first_difficult_primes(static_cast<std::size_t>(state.range(0)));
  const u64 p = primes.back();
  for (auto _ : state) benchmark::DoNotOptimize(count_solutions(p));
  state.SetLabel("p=" + std::to_string(p));
}
BENCHMARK(BM_CountSolutions)->Arg(1)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_BuildFilter(benchmark::State& state) {
  const IdentityDB db(CoverageConfig{}.identity_bound);
  for (auto _ : state) {
    // fresh engine each round so memoized verdicts do not carry over
    const CoverageEngine engine(db, CoverageConfig{});
    benchmark::DoNotOptimize(engine.build_filter(static_cast<u64>(state.range(0)), 1, false));
  }
}
BENCHMARK(BM_BuildFilter)->Arg(31)->Arg(997)->Arg(3571)->Unit(benchmark::kMillisecond);

static void BM_FilterAccepts(benchmark::State& state) {
  const IdentityDB db(CoverageConfig{}.identity_bound);
  const CoverageEngine engine(db, CoverageConfig{});
  const FilterSet f = engine.build_filter(1009, 1, false);
  u64 n = 1000000007;
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter_accepts(f, n));
    n += 840;
  }
}
BENCHMARK(BM_FilterAccepts);

BENCHMARK_MAIN();
