#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "khessian/solver.hpp"

using namespace khessian;
using namespace khessian::geometry;

namespace {

struct Setup {
  explicit Setup(int samples)
      : grid(2, samples), spectral(grid), g(make_metric(spectral, MetricSpec::torsion())), u(grid), f(grid) {
    const double tau = 2.0 * std::numbers::pi;
    for (std::size_t v = 0; v < grid.size(); ++v) {
      u[v] = 0.03 * std::cos(tau * grid.x(v, 0)) * std::cos(tau * grid.y(v, 0));
      f[v] = 0.2 * std::sin(tau * grid.x(v, 1));
    }
  }
  TorusGrid grid;
  Spectral spectral;
  MetricField g;
  ScalarField u, f;
};

}  // namespace

static void BM_ComplexHessian(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(complex_hessian(s.spectral, s.u));
}
BENCHMARK(BM_ComplexHessian)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Residual(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const solver::Solver solver(s.spectral, s.g, 2);
  for (auto _ : state) benchmark::DoNotOptimize(solver.residual(s.u, 0.0, s.f));
}
BENCHMARK(BM_Residual)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_NewtonStep(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const solver::Solver solver(s.spectral, s.g, 2);
  const solver::SolveState at{s.u, 0.0, 1.0, 0.0, 0.0, {}};
  for (auto _ : state) benchmark::DoNotOptimize(solver.newton_step(at, s.f));
}
BENCHMARK(BM_NewtonStep)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_FullSolve(benchmark::State& state) {
  const Setup s(8);
  const solver::Solver solver(s.spectral, s.g, 2);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(s.f));
}
BENCHMARK(BM_FullSolve)->Unit(benchmark::kMillisecond)->Iterations(2);
