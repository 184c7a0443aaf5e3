#include <benchmark/benchmark.h>

#include <random>

#include "khessian/operator.hpp"

using namespace khessian;

namespace {

// Positive definite pair (g, w) with w close to g so λ stays in every cone.
std::pair<CMatrix, CMatrix> random_pair(int n) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  CMatrix a(n, n), b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = Complex(nd(rng), nd(rng));
      b(i, j) = Complex(nd(rng), nd(rng));
    }
  const CMatrix g = 0.2 * a * a.adjoint() + CMatrix::Identity(n, n);
  return {g, g + 0.05 * (b + b.adjoint())};
}

}  // namespace

static void BM_RelativeSpectrum(benchmark::State& state) {
  const auto [g, w] = random_pair(static_cast<int>(state.range(0)));
  RVector lambda;
  CMatrix basis;
  for (auto _ : state) {
    operators::relative_spectrum(g, w, lambda, &basis);
    benchmark::DoNotOptimize(lambda.data());
  }
}
BENCHMARK(BM_RelativeSpectrum)->DenseRange(2, 5);

static void BM_EvaluatePointWithGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto [g, w] = random_pair(n);
  CMatrix gradient;
  for (auto _ : state) benchmark::DoNotOptimize(operators::evaluate_point(g, w, n, &gradient));
}
BENCHMARK(BM_EvaluatePointWithGradient)->DenseRange(2, 5);
