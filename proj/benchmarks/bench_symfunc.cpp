#include <benchmark/benchmark.h>

#include "khessian/symfunc.hpp"

using namespace khessian::symfunc;

static void BM_ElementaryAll(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto lambda = sample_gamma_k(n, ConeLevel(n / 2 + 1), 1.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(elementary_all(lambda.values(), n));
}
BENCHMARK(BM_ElementaryAll)->DenseRange(2, 8, 2);

static void BM_ConeSampler(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ConeSampler sampler(n, ConeLevel(n - 1), 1.0, 7);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.next());
}
BENCHMARK(BM_ConeSampler)->DenseRange(3, 6);

static void BM_BasicInequality(benchmark::State& state) {
  const auto lambda = sample_gamma_k(5, ConeLevel(3), 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(basic_inequality_check(lambda, ConeLevel(3)));
}
BENCHMARK(BM_BasicInequality);
