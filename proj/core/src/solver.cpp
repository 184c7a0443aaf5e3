#include "khessian/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "khessian/errors.hpp"
#include "khessian/field_io.hpp"
#include "khessian/operator.hpp"
#include "khessian/symfunc.hpp"

namespace khessian::solver {

using geometry::ComplexVec;
using geometry::HermitianField;

void SolveConfig::validate() const {
  if (n < 2 || n > kMaxDim) throw DomainError("solve config: n must lie in [2, " + std::to_string(kMaxDim) + "]");
  if (k < 1 || k > n) throw DomainError("solve config: k must satisfy 1 <= k <= n");
  if (samples < 8 || samples % 2) throw DomainError("solve config: N must be even and >= 8");
  if (!(options.tolerance > 0.0)) throw DomainError("solve config: tolerance must be positive");
  if (options.continuation_steps < 1) throw DomainError("solve config: continuation steps must be >= 1");
  if (options.max_newton_iterations < 1) throw DomainError("solve config: max Newton iterations must be >= 1");
  if (!(options.shrink > 0.0 && options.shrink < 1.0)) throw DomainError("solve config: shrink must lie in (0, 1)");
  if (!(options.min_step > 0.0 && options.min_step <= 1.0)) throw DomainError("solve config: min step must lie in (0, 1]");
  if (!(options.linear.relative_tolerance > 0.0)) throw DomainError("solve config: linear tolerance must be positive");
  if (options.linear.max_iterations < 1 || options.linear.restart < 1)
    throw DomainError("solve config: linear iteration limits must be >= 1");
}

namespace {

struct PointwiseEval {
  ScalarField residual;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::size_t bad_node = 0;
  bool ok = true;
};

// Evaluates the residual, optionally collecting F^{ij̄}; stops at the first
// node outside the cone.
PointwiseEval evaluate_residual(const geometry::Spectral& spectral, const geometry::MetricField& g, int k,
                                const ScalarField& u, double b, const ScalarField& source,
                                HermitianField* gradient) {
  const HermitianField hess = geometry::complex_hessian(spectral, u);
  PointwiseEval out{ScalarField(spectral.grid())};
  out.lambda_min = std::numeric_limits<double>::infinity();
  out.lambda_max = -std::numeric_limits<double>::infinity();
  CMatrix grad;
  for (std::size_t node = 0; node < u.size(); ++node) {
    const CMatrix gm = g.at(node);
    const auto p = operators::evaluate_point(gm, gm + hess.matrix(node), k, gradient ? &grad : nullptr);
    if (!p.positive_metric || !p.in_cone) {
      out.ok = false;
      out.bad_node = node;
      return out;
    }
    out.residual[node] = p.value - std::exp((source[node] + b) / k);
    out.lambda_min = std::min(out.lambda_min, p.lambda_min);
    out.lambda_max = std::max(out.lambda_max, p.lambda_max);
    if (gradient) gradient->set(node, grad);
  }
  return out;
}

ScalarField mean_free(ScalarField u) {
  u += -u.mean();
  return u;
}

}  // namespace

Solver::Solver(const geometry::Spectral& spectral, const geometry::MetricField& g, int k, SolverOptions options)
    : spectral_(spectral), g_(g), k_(k), options_(options) {
  if (!(spectral.grid() == g.grid())) throw DomainError("Solver: metric grid differs from spectral grid");
  if (k < 1 || k > g.dim()) throw DomainError("Solver: k must satisfy 1 <= k <= n");
}

ScalarField Solver::residual(const ScalarField& u, double b, const ScalarField& source) const {
  auto e = evaluate_residual(spectral_, g_, k_, u, b, source, nullptr);
  if (!e.ok) throw DomainError("residual: omega_u leaves Gamma_k at node " + std::to_string(e.bad_node));
  return std::move(e.residual);
}

struct Solver::Linearization {
  HermitianField coeff;       // F^{ij̄}(x)
  std::vector<double> weight;  // e^{(f_t+b)/k} / k
  ScalarField residual;
  std::vector<double> inverse_symbol;  // 1 / Σ F̄^{ij̄} symbol_{ij̄}(ξ), 0 at ξ = 0
  double mean_weight = 0.0;
};

Solver::Linearization Solver::linearize(const SolveState& state, const ScalarField& source) const {
  const int n = g_.dim();
  HermitianField coeff(spectral_.grid(), n);
  auto e = evaluate_residual(spectral_, g_, k_, state.u, state.b, source, &coeff);
  if (!e.ok) throw DomainError("newton_step: omega_u leaves Gamma_k at node " + std::to_string(e.bad_node));

  const std::size_t size = state.u.size();
  Linearization lin{std::move(coeff), std::vector<double>(size), std::move(e.residual), {}, 0.0};
  for (std::size_t node = 0; node < size; ++node) {
    lin.weight[node] = std::exp((source[node] + state.b) / k_) / k_;
    lin.mean_weight += lin.weight[node];
  }
  lin.mean_weight /= static_cast<double>(size);

  CMatrix mean_coeff = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Complex s(0.0, 0.0);
      for (Complex v : lin.coeff.upper(i, j)) s += v;
      s /= static_cast<double>(size);
      mean_coeff(i, j) = s;
      mean_coeff(j, i) = std::conj(s);
    }
  lin.inverse_symbol.assign(size, 0.0);
  for (std::size_t node = 1; node < size; ++node) {
    Complex s(0.0, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += mean_coeff(i, j) * spectral_.ddbar_symbol(i, j)[node];
    if (!(s.real() < 0.0)) throw std::logic_error("newton_step: averaged operator is not elliptic");
    lin.inverse_symbol[node] = 1.0 / s.real();
  }
  return lin;
}

NewtonStep Solver::newton_step(const SolveState& state, const ScalarField& source) const {
  const Linearization lin = linearize(state, source);
  const int n = g_.dim();
  const std::size_t size = state.u.size();
  const auto m = static_cast<Eigen::Index>(size);

  LinearMap apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(m + 1);
    const ComplexVec hat = spectral_.forward(std::span<const double>(in.data(), size));
    out.head(m).setZero();
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const ComplexVec h = spectral_.apply(hat, spectral_.ddbar_symbol(i, j));
        const ComplexVec& c = lin.coeff.upper(i, j);
        if (i == j) {
          for (std::size_t node = 0; node < size; ++node) out(node) += c[node].real() * h[node].real();
        } else {
          for (std::size_t node = 0; node < size; ++node) out(node) += 2.0 * std::real(c[node] * h[node]);
        }
      }
    for (std::size_t node = 0; node < size; ++node) out(node) -= lin.weight[node] * in(m);
    out(m) = in.head(m).mean();
  };

  LinearMap precondition = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(m + 1);
    const double mean_r = in.head(m).mean();
    ComplexVec hat = spectral_.forward(std::span<const double>(in.data(), size));
    for (std::size_t node = 0; node < size; ++node) hat[node] *= lin.inverse_symbol[node];
    hat[0] = in(m) * static_cast<double>(size);
    const ComplexVec back = spectral_.backward(std::move(hat));
    for (std::size_t node = 0; node < size; ++node) out(node) = back[node].real();
    out(m) = -mean_r / lin.mean_weight;
  };

  Eigen::VectorXd rhs(m + 1);
  for (std::size_t node = 0; node < size; ++node) rhs(node) = -lin.residual[node];
  rhs(m) = 0.0;

  const GmresResult r = gmres(apply, precondition, rhs, options_.linear);
  if (!r.converged)
    throw IterationError("newton_step: linear solve stagnated at relative residual " +
                         std::to_string(r.relative_residual) + " after " + std::to_string(r.iterations) +
                         " iterations");
  NewtonStep step{ScalarField(state.u.grid(), std::vector<double>(r.x.data(), r.x.data() + size)), r.x(m),
                  r.iterations, r.relative_residual};
  return step;
}

double Solver::line_search(const SolveState& state, const NewtonStep& step, const ScalarField& source) const {
  if (step.du.sup_abs() == 0.0 && step.db == 0.0) return 1.0;
  const double current = residual(state.u, state.b, source).sup_abs();
  for (double s = 1.0; s >= options_.min_step; s *= options_.shrink) {
    ScalarField trial = state.u;
    for (std::size_t node = 0; node < trial.size(); ++node) trial[node] += s * step.du[node];
    const auto e = evaluate_residual(spectral_, g_, k_, trial, state.b + s * step.db, source, nullptr);
    if (e.ok && e.residual.sup_abs() < current) return s;
  }
  throw IterationError("line_search: no admissible step down to " + std::to_string(options_.min_step));
}

bool Solver::newton_loop(SolveState& state, const ScalarField& source, SolveReport& report) const {
  for (int it = 0;; ++it) {
    const auto e = evaluate_residual(spectral_, g_, k_, state.u, state.b, source, nullptr);
    if (!e.ok) {
      report.message = "iterate left Gamma_k at t=" + std::to_string(state.t);
      return false;
    }
    const double sup = e.residual.sup_abs();
    state.residual_history.push_back(sup);
    state.lambda_min = e.lambda_min;
    state.lambda_max = e.lambda_max;
    if (observer_) observer_(state, source);
    if (sup <= options_.tolerance) return true;
    if (it >= options_.max_newton_iterations) {
      report.message = "Newton did not converge in " + std::to_string(options_.max_newton_iterations) +
                       " iterations at t=" + std::to_string(state.t) + " (residual " + std::to_string(sup) + ")";
      return false;
    }
    try {
      const NewtonStep step = newton_step(state, source);
      report.linear_iterations += step.linear_iterations;
      const double s = line_search(state, step, source);
      for (std::size_t node = 0; node < state.u.size(); ++node) state.u[node] += s * step.du[node];
      state.b += s * step.db;
      ++report.newton_iterations;
    } catch (const IterationError& err) {
      report.message = std::string(err.what()) + " at t=" + std::to_string(state.t);
      return false;
    }
  }
}

void Solver::finalize(SolveState& state, SolveReport& report) const {
  state.u += -state.u.sup();
  report.u = state.u;
  report.b = state.b;
  report.lambda_min = state.lambda_min;
  report.lambda_max = state.lambda_max;
  report.residual_history = state.residual_history;
  report.final_residual = state.residual_history.empty() ? 0.0 : state.residual_history.back();

  const HermitianField hess = geometry::complex_hessian(spectral_, state.u);
  RVector lambda;
  double largest = 0.0;
  for (std::size_t node = 0; node < state.u.size(); ++node) {
    if (operators::relative_spectrum(g_.at(node), hess.matrix(node), lambda, nullptr))
      largest = std::max(largest, lambda.cwiseAbs().maxCoeff());
  }
  report.max_ddbar_norm = largest;
  report.max_gradient_sq = geometry::gradient_norm_sq(spectral_, state.u, g_).sup();
}

SolveReport Solver::solve(const ScalarField& f, const ScalarField* initial) const {
  const auto start = std::chrono::steady_clock::now();
  if (!(f.grid() == spectral_.grid())) throw DomainError("solve: source grid differs from solver grid");
  if (!f.finite()) throw DomainError("solve: source has non-finite values");
  const double log_c = std::log(symfunc::binomial(g_.dim(), k_));

  auto source_at = [&](double t) {
    ScalarField s(f.grid());
    for (std::size_t node = 0; node < s.size(); ++node) s[node] = (1.0 - t) * log_c + t * f[node];
    return s;
  };

  SolveReport report(f.grid());
  SolveState state{initial ? mean_free(*initial) : ScalarField(f.grid()), 0.0, 0.0, 0.0, 0.0, {}};
  if (initial && !(initial->grid() == f.grid())) throw DomainError("solve: initial guess grid mismatch");

  auto finish = [&](bool ok) {
    report.converged = ok;
    finalize(state, report);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  };

  if (!newton_loop(state, source_at(0.0), report)) return finish(false);
  const int steps = options_.continuation_steps;
  for (int j = 1; j <= steps; ++j) {
    const double t = static_cast<double>(j) / steps;
    SolveState saved = state;
    state.t = t;
    if (newton_loop(state, source_at(t), report)) {
      report.last_good_t = t;
      ++report.continuation_steps;
      continue;
    }
    // Bisect the failed step once.
    state = saved;
    const double mid = 0.5 * (report.last_good_t + t);
    state.t = mid;
    bool ok = newton_loop(state, source_at(mid), report);
    if (ok) {
      report.last_good_t = mid;
      ++report.continuation_steps;
      saved = state;
      state.t = t;
      ok = newton_loop(state, source_at(t), report);
    }
    if (!ok) {
      state = saved;
      report.message += "; aborted with last good t=" + std::to_string(report.last_good_t) +
                        " (try more continuation steps)";
      return finish(false);
    }
    report.last_good_t = t;
    ++report.continuation_steps;
  }
  report.message = "converged";
  return finish(true);
}

// ---------------------------------------------------------------------------

ScalarField manufactured_source(const geometry::Spectral& spectral, const geometry::MetricField& g,
                                const ScalarField& u_star, int k) {
  const HermitianField hess = geometry::complex_hessian(spectral, u_star);
  ScalarField f(spectral.grid());
  for (std::size_t node = 0; node < f.size(); ++node) {
    const CMatrix gm = g.at(node);
    const auto p = operators::evaluate_point(gm, gm + hess.matrix(node), k, nullptr);
    if (!p.positive_metric || !p.in_cone)
      throw DomainError("manufactured_source: omega_u* leaves Gamma_k at node " + std::to_string(node));
    f[node] = std::log(p.sigma_k);
  }
  return f;
}

ScalarField build_source(const SolveConfig& config, const geometry::TorusGrid& grid) {
  if (config.f_file) {
    ScalarField f = geometry::read_scalar_field(*config.f_file);
    if (!(f.grid() == grid)) throw DomainError("source field file grid does not match n and N");
    return f;
  }
  return geometry::evaluate_trig(grid, config.f_terms);
}

SolveReport solve(const SolveConfig& config) {
  config.validate();
  const geometry::TorusGrid grid(config.n, config.samples);
  const geometry::Spectral spectral(grid);
  const geometry::MetricField g = geometry::make_metric(spectral, config.metric);
  const ScalarField f = build_source(config, grid);
  const Solver solver(spectral, g, config.k, config.options);
  return solver.solve(f);
}

}  // namespace khessian::solver
