#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "khessian/geometry.hpp"
#include "khessian/krylov.hpp"
#include "khessian/metric.hpp"
#include "khessian/trig.hpp"

namespace khessian::solver {

using geometry::ScalarField;

struct SolverOptions {
  int continuation_steps = 8;
  double tolerance = 1e-9;
  int max_newton_iterations = 40;
  double shrink = 0.5;
  double min_step = 0x1p-20;
  GmresOptions linear;
};

/// Full problem description, as read from a config file.
struct SolveConfig {
  int n = 2;
  int k = 2;
  int samples = 16;
  geometry::MetricSpec metric;
  std::vector<geometry::TrigTerm> f_terms;
  std::optional<std::string> f_file;
  SolverOptions options;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SolveState {
  ScalarField u;
  double b = 0.0;
  double t = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::vector<double> residual_history;
};

struct NewtonStep {
  ScalarField du;
  double db = 0.0;
  int linear_iterations = 0;
  double linear_residual = 0.0;
};

struct SolveReport {
  explicit SolveReport(const geometry::TorusGrid& grid) : u(grid) {}

  bool converged = false;
  std::string message;
  ScalarField u;
  double b = 0.0;
  double last_good_t = 0.0;
  int newton_iterations = 0;
  int linear_iterations = 0;
  int continuation_steps = 0;
  double final_residual = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  /// Largest |eigenvalue| of g⁻¹∂∂̄u over the grid.
  double max_ddbar_norm = 0.0;
  /// max |∇u|²_g
  double max_gradient_sq = 0.0;
  double wall_seconds = 0.0;
  std::vector<double> residual_history;
};

/// Called after every accepted Newton iterate with the current state and the
/// source f_t of the active continuation step.
using Observer = std::function<void(const SolveState& state, const ScalarField& source)>;

/// Damped Newton solver with source continuation for
///   σ_k(λ(g⁻¹(g + ∂∂̄u)))^{1/k} = e^{(f + b)/k}.
class Solver {
 public:
  Solver(const geometry::Spectral& spectral, const geometry::MetricField& g, int k, SolverOptions options = {});

  int k() const { return k_; }
  const SolverOptions& options() const { return options_; }
  void set_observer(Observer observer) { observer_ = std::move(observer); }

  /// F(λ) - e^{(f_t + b)/k} pointwise. Throws DomainError outside Γ_k.
  ScalarField residual(const ScalarField& u, double b, const ScalarField& source) const;

  /// Solves the bordered linearization at `state`. Throws IterationError if the
  /// Krylov iteration does not reach the configured tolerance.
  NewtonStep newton_step(const SolveState& state, const ScalarField& source) const;

  /// Largest s = shrink^j >= min_step keeping ω_u in Γ_k everywhere and
  /// strictly reducing the sup-norm residual. Throws IterationError if none.
  double line_search(const SolveState& state, const NewtonStep& step, const ScalarField& source) const;

  /// Continuation from f₀ = log C(n,k) to f. `initial` seeds u (its mean is removed).
  SolveReport solve(const ScalarField& f, const ScalarField* initial = nullptr) const;

 private:
  struct Linearization;
  Linearization linearize(const SolveState& state, const ScalarField& source) const;
  bool newton_loop(SolveState& state, const ScalarField& source, SolveReport& report) const;
  void finalize(SolveState& state, SolveReport& report) const;

  const geometry::Spectral& spectral_;
  const geometry::MetricField& g_;
  int k_;
  SolverOptions options_;
  Observer observer_;
};

/// log σ_k(λ(g⁻¹(g + ∂∂̄u*))): the source for which u* (up to a constant) and
/// b = 0 solve the equation. Throws DomainError if ω_{u*} leaves Γ_k.
ScalarField manufactured_source(const geometry::Spectral& spectral, const geometry::MetricField& g,
                                const ScalarField& u_star, int k);

/// Samples f from the config's terms or field file.
ScalarField build_source(const SolveConfig& config, const geometry::TorusGrid& grid);

/// Builds grid, metric and source from `config` and solves.
SolveReport solve(const SolveConfig& config);

}  // namespace khessian::solver
