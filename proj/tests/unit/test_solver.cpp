#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "khessian/errors.hpp"
#include "khessian/operator.hpp"
#include "khessian/solver.hpp"
#include "oracles.hpp"

using namespace khessian;
using namespace khessian::geometry;
using namespace khessian::solver;
using std::numbers::pi;

namespace {

constexpr double kTwoPi = 2.0 * pi;

ScalarField sample(const TorusGrid& grid, const std::function<double(std::size_t)>& fn) {
  ScalarField f(grid);
  for (std::size_t node = 0; node < grid.size(); ++node) f[node] = fn(node);
  return f;
}

ScalarField constant(const TorusGrid& grid, double c) { return ScalarField(grid, c); }

struct Problem {
  Problem(int n, int samples, MetricSpec spec = MetricSpec::euclidean())
      : grid(n, samples), spectral(grid), g(make_metric(spectral, spec)) {}
  TorusGrid grid;
  Spectral spectral;
  MetricField g;
};

// Fraction of the energy of `f` carried by the Fourier modes (±1, 0, …, 0).
double first_mode_energy_fraction(const Spectral& sp, const ScalarField& f) {
  const auto hat = sp.forward(f.values());
  double total = 0.0, mode = 0.0;
  for (std::size_t node = 0; node < hat.size(); ++node) {
    const double e = std::norm(hat[node]);
    total += e;
    bool on_mode = std::abs(sp.wavenumber(node, 0)) == 1;
    for (int a = 1; a < sp.grid().axes(); ++a) on_mode = on_mode && sp.wavenumber(node, a) == 0;
    if (on_mode) mode += e;
  }
  return total > 0.0 ? mode / total : 1.0;
}

}  // namespace

TEST_CASE("config validation") {
  SolveConfig c;
  CHECK_NOTHROW(c.validate());
  c.k = 3;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = SolveConfig{};
  c.samples = 10;
  CHECK_NOTHROW(c.validate());
  c.samples = 7;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = SolveConfig{};
  c.options.tolerance = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = SolveConfig{};
  c.options.continuation_steps = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("residual examples") {
  for (auto [n, k] : {std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 2}}) {
    Problem p(n, 8);
    const Solver s(p.spectral, p.g, k);
    const double log_c = std::log(symfunc::binomial(n, k));
    CHECK(s.residual(ScalarField(p.grid), 0.0, constant(p.grid, log_c)).sup_abs() < 1e-14);
    const auto r = s.residual(ScalarField(p.grid), 0.0, constant(p.grid, 0.0));
    const double expected = std::pow(symfunc::binomial(n, k), 1.0 / k) - 1.0;
    CHECK(std::abs(r.sup() - expected) < 1e-14);
    CHECK(std::abs(r.inf() - expected) < 1e-14);
  }
  Problem p(2, 8);
  const Solver s(p.spectral, p.g, 2);
  const auto u = sample(p.grid, [&](std::size_t v) { return 0.5 * std::cos(kTwoPi * p.grid.x(v, 0)); });
  CHECK_THROWS_AS(s.residual(u, 0.0, constant(p.grid, 0.0)), DomainError);
}

TEST_CASE("manufactured residual vanishes to round-off") {
  Problem p(2, 12, MetricSpec::torsion());
  const auto u_star = sample(p.grid, [&](std::size_t v) {
    return 0.03 * (std::cos(kTwoPi * p.grid.x(v, 0)) * std::cos(kTwoPi * p.grid.y(v, 0)) + std::cos(kTwoPi * p.grid.x(v, 1)));
  });
  const auto f = manufactured_source(p.spectral, p.g, u_star, 2);
  const Solver s(p.spectral, p.g, 2);
  CHECK(s.residual(u_star, 0.0, f).sup_abs() < 1e-13);
  CHECK_THROWS_AS(manufactured_source(p.spectral, p.g, 40.0 * u_star, 2), DomainError);
}

TEST_CASE("Newton step at an exact solution is zero") {
  Problem p(2, 8);
  const auto u_star = sample(p.grid, [&](std::size_t v) { return 0.02 * std::sin(kTwoPi * p.grid.y(v, 1)); });
  const auto f = manufactured_source(p.spectral, p.g, u_star, 2);
  const Solver s(p.spectral, p.g, 2);
  SolveState state{u_star, 0.0, 1.0, 0, 0, {}};
  state.u += -u_star.mean();
  const auto step = s.newton_step(state, f);
  CHECK(step.du.sup_abs() < 1e-12);
  CHECK(std::abs(step.db) < 1e-12);
}

TEST_CASE("Newton step for a single-mode source stays on that mode") {
  Problem p(2, 8);
  const Solver s(p.spectral, p.g, 2);
  const double eps = 1e-3;
  const auto f = sample(p.grid, [&](std::size_t v) { return std::log(1.0) + eps * std::cos(kTwoPi * p.grid.x(v, 0)); });
  const SolveState state{ScalarField(p.grid), 0.0, 1.0, 0, 0, {}};
  const auto step = s.newton_step(state, f);
  CHECK(first_mode_energy_fraction(p.spectral, step.du) >= 0.999);
  CHECK(std::abs(step.du.mean()) < 1e-14);
  // Constant-coefficient oracle: F^{ij̄} = ½δ at λ = 1, so ½Δ_C δu = e^{0}/2·ε cos 2πx₁ / ... .
  // With ∂∂̄ cos 2πx₁ = -π² cos 2πx₁ and the residual 1 - e^{ε cos/2}, δu ≈ -(ε/2) cos 2πx₁ / (π²/2).
  double err = 0.0;
  for (std::size_t v = 0; v < p.grid.size(); ++v)
    err = std::max(err, std::abs(step.du[v] + eps / (pi * pi) * std::cos(kTwoPi * p.grid.x(v, 0))));
  CHECK(err < 1e-6);
}

TEST_CASE("line search examples") {
  Problem p(2, 8);
  const Solver s(p.spectral, p.g, 2);
  const auto f = sample(p.grid, [&](std::size_t v) { return 0.01 * std::cos(kTwoPi * p.grid.x(v, 0)); });
  const SolveState state{ScalarField(p.grid), 0.0, 1.0, 0, 0, {}};

  NewtonStep zero{ScalarField(p.grid), 0.0, 0, 0.0};
  CHECK(s.line_search(state, zero, f) == 1.0);

  const auto step = s.newton_step(state, f);
  CHECK(s.line_search(state, step, f) == 1.0);

  // Scale the direction so the full step drives λ₁ = 1 - π²A cos 2πx₁ negative.
  NewtonStep wild = step;
  const double amplitude = step.du.sup_abs();
  wild.du *= 1.5 / (pi * pi * amplitude);
  const double t = s.line_search(state, wild, f);
  CHECK(t <= 0.5);
  ScalarField trial = state.u;
  for (std::size_t v = 0; v < trial.size(); ++v) trial[v] += t * wild.du[v];
  CHECK_NOTHROW(s.residual(trial, t * wild.db, f));

  NewtonStep uphill = step;
  uphill.du *= -1.0;
  uphill.db = -step.db;
  CHECK_THROWS_AS(s.line_search(state, uphill, f), IterationError);
}

TEST_CASE("identity source yields u = 0 and b = 0") {
  for (auto [n, k] : {std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 2}}) {
    SolveConfig c;
    c.n = n;
    c.k = k;
    c.samples = 8;
    c.f_terms = {{std::log(symfunc::binomial(n, k)), std::vector<int>(static_cast<std::size_t>(2 * n), 0), 0.0}};
    const auto rep = solve(c);
    CHECK(rep.converged);
    CHECK(rep.u.sup_abs() <= 1e-10);
    CHECK(std::abs(rep.b) <= 1e-10);
  }
}

TEST_CASE("constant source: b = log C(n,k) - c exactly") {
  Problem p(2, 8, MetricSpec::euclidean());
  const Solver s(p.spectral, p.g, 2);
  const auto rep = s.solve(constant(p.grid, 0.7));
  CHECK(rep.converged);
  CHECK(rep.u.sup_abs() <= 1e-12);
  CHECK(std::abs(rep.b - (std::log(1.0) - 0.7)) <= 1e-12);
}

TEST_CASE("property: MMS solve with quadratic Newton convergence, cone preservation and b identities") {
  Problem p(2, 12);
  const auto u_star = sample(p.grid, [&](std::size_t v) {
    return 0.05 * (std::cos(kTwoPi * p.grid.x(v, 0)) * std::cos(kTwoPi * p.grid.y(v, 0)) + std::cos(kTwoPi * p.grid.x(v, 1)));
  });
  const auto f = manufactured_source(p.spectral, p.g, u_star, 2);
  Solver s(p.spectral, p.g, 2);
  std::size_t outside = 0, observed = 0;
  s.set_observer([&](const SolveState& state, const ScalarField&) {
    ++observed;
    const auto hess = complex_hessian(p.spectral, state.u);
    for (std::size_t v = 0; v < p.grid.size(); ++v) {
      RVector lam;
      operators::relative_spectrum(p.g.at(v), CMatrix(p.g.at(v) + hess.matrix(v)), lam, nullptr);
      if (!symfunc::in_gamma_k(std::vector<double>(lam.data(), lam.data() + lam.size()), 2)) ++outside;
    }
  });
  const auto rep = s.solve(f);
  REQUIRE(rep.converged);
  CHECK(observed > 5);
  CHECK(outside == 0);
  auto shifted = u_star;
  shifted += -u_star.sup();
  CHECK((rep.u - shifted).sup_abs() <= 1e-6);
  CHECK(std::abs(rep.b) <= 1e-8);
  CHECK(rep.u.sup() == 0.0);
  CHECK(rep.final_residual <= 1e-9);

  // Quadratic convergence once the residual is below 1e-3: r_{j+1} <= C r_j².
  // Continuation restarts show up as jumps, so only consecutive decreases count.
  const auto& h = rep.residual_history;
  double worst = 0.0;
  for (std::size_t j = 0; j + 1 < h.size(); ++j)
    if (h[j] <= 1e-3 && h[j + 1] < h[j] && h[j + 1] > 1e-14) worst = std::max(worst, h[j + 1] / (h[j] * h[j]));
  CHECK(worst < 1e3);

  // Monge-Ampère volume identity for g = I: ∫ det(I + ∂∂̄u) = 1 = ∫ e^{f+b}.
  double mass = 0.0;
  for (std::size_t v = 0; v < p.grid.size(); ++v) mass += std::exp(f[v] + rep.b);
  CHECK(std::abs(mass / static_cast<double>(p.grid.size()) - 1.0) <= 1e-9);
}

TEST_CASE("property: maximum-principle bounds on b and the volume identity for a general source") {
  Problem p(2, 12);
  const auto f = sample(p.grid, [&](std::size_t v) {
    return 0.4 * std::cos(kTwoPi * p.grid.x(v, 0)) + 0.25 * std::sin(kTwoPi * (p.grid.y(v, 0) + p.grid.x(v, 1)));
  });
  const Solver s(p.spectral, p.g, 2);
  const auto rep = s.solve(f);
  REQUIRE(rep.converged);
  const double log_c = 0.0, tau = 1e-8;
  CHECK(rep.b <= log_c + (-1.0 * f).sup() + tau);
  CHECK(rep.b >= log_c - f.sup() - tau);
  double mass = 0.0;
  for (std::size_t v = 0; v < p.grid.size(); ++v) mass += std::exp(f[v] + rep.b);
  CHECK(std::abs(mass / static_cast<double>(p.grid.size()) - 1.0) <= 1e-8);
}

TEST_CASE("property: mesh convergence of the manufactured solution on a non-polynomial profile") {
  // u* = a(e^{cos 2πx₁} + e^{sin 2πx₂}) has infinitely many Fourier modes, so
  // the discrete solution differs from u* by a spectral truncation error. The
  // source is built from the exact derivatives, not from the grid.
  const double a = 0.02;
  const auto profile = [&](const TorusGrid& grid, std::size_t v, bool second) {
    const double s1 = kTwoPi * grid.x(v, 0), s2 = kTwoPi * grid.x(v, 1);
    if (!second) return a * (std::exp(std::cos(s1)) + std::exp(std::sin(s2)));
    // u_{jj̄} = ¼ ∂²_{x_j} u for functions of x_j alone.
    const double d1 = a * kTwoPi * kTwoPi * (std::sin(s1) * std::sin(s1) - std::cos(s1)) * std::exp(std::cos(s1));
    const double d2 = a * kTwoPi * kTwoPi * (std::cos(s2) * std::cos(s2) - std::sin(s2)) * std::exp(std::sin(s2));
    return std::log((1.0 + 0.25 * d1) * (1.0 + 0.25 * d2));
  };
  std::vector<double> errors;
  for (int samples : {12, 16}) {
    Problem p(2, samples);
    const auto u_star = sample(p.grid, [&](std::size_t v) { return profile(p.grid, v, false); });
    const auto f = sample(p.grid, [&](std::size_t v) { return profile(p.grid, v, true); });
    const Solver s(p.spectral, p.g, 2);
    const auto rep = s.solve(f);
    REQUIRE(rep.converged);
    auto shifted = u_star;
    shifted += -u_star.sup();
    errors.push_back((rep.u - shifted).sup_abs());
  }
  MESSAGE("MMS errors N=12: " << errors[0] << ", N=16: " << errors[1]);
  CHECK(errors[0] > 1e-12);
  CHECK(errors[1] <= errors[0] / 10.0);
}

TEST_CASE("property: gauge invariance and determinism") {
  Problem p(2, 8, MetricSpec::torsion());
  const auto f = sample(p.grid, [&](std::size_t v) { return 0.3 * std::cos(kTwoPi * p.grid.y(v, 1)); });
  const auto guess = sample(p.grid, [&](std::size_t v) { return 0.01 * std::sin(kTwoPi * p.grid.x(v, 0)); });
  auto lifted = guess;
  lifted += 5.0;
  const Solver s(p.spectral, p.g, 2);
  const auto a = s.solve(f, &guess);
  const auto b = s.solve(f, &lifted);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK((a.u - b.u).sup_abs() <= 1e-12);
  CHECK(std::abs(a.b - b.b) <= 1e-12);

  const auto c = s.solve(f);
  const auto d = s.solve(f);
  CHECK(std::memcmp(c.u.values().data(), d.u.values().data(), sizeof(double) * c.u.size()) == 0);
  CHECK(c.b == d.b);
  CHECK(c.residual_history == d.residual_history);
}

TEST_CASE("solver failure is reported with the last good continuation parameter") {
  Problem p(2, 8);
  SolverOptions o;
  o.continuation_steps = 1;
  o.max_newton_iterations = 1;
  const Solver s(p.spectral, p.g, 2, o);
  const auto f = sample(p.grid, [&](std::size_t v) { return 3.0 * std::cos(kTwoPi * p.grid.x(v, 0)); });
  const auto rep = s.solve(f);
  CHECK_FALSE(rep.converged);
  CHECK(rep.last_good_t < 1.0);
  CHECK(rep.message.find("last good t") != std::string::npos);
}
