#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ewgsl/entmax.h"

namespace {

std::vector<double> RandomScores(int dim) {
  std::mt19937_64 rng(dim);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<double> e(dim);
  for (double& x : e) x = u(rng);
  return e;
}

void BM_EntmaxBisection(benchmark::State& state) {
  const auto e = RandomScores(static_cast<int>(state.range(0)));
  std::vector<double> out(e.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(ewgsl::EntmaxRow(e, 1.5, out));
  }
}
BENCHMARK(BM_EntmaxBisection)->RangeMultiplier(4)->Range(4, 1024);

void BM_EntmaxSorted(benchmark::State& state) {
  const auto e = RandomScores(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ewgsl::EntmaxSortedExact(e, 1.5));
  }
}
BENCHMARK(BM_EntmaxSorted)->RangeMultiplier(4)->Range(4, 1024);

void BM_Softmax(benchmark::State& state) {
  const auto e = RandomScores(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ewgsl::Softmax(e));
  }
}
BENCHMARK(BM_Softmax)->RangeMultiplier(4)->Range(4, 1024);

}  // namespace
