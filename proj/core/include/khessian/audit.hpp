#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "khessian/geometry.hpp"
#include "khessian/metric.hpp"
#include "khessian/solver.hpp"

namespace khessian::audit {

/// Outcome of one audit. The verdict is "pass" exactly when `violations` is empty.
struct AuditReport {
  std::string name;
  std::string description;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> constants;
  std::map<std::string, double> tolerances;
  std::vector<std::string> violations;
  std::vector<std::string> notes;

  bool pass() const { return violations.empty(); }
  void write_csv(std::ostream& os) const;
};

// --- sampled cone data -------------------------------------------------------

/// |λ_p| <= (n-k)λ_k for p > k on `samples` uniform Γ_k samples plus
/// samples/10 points pushed next to ∂Γ_k.
AuditReport audit_basic_inequality(int n, int k, std::size_t samples, std::uint64_t seed);

/// Empirical constants of |λ_{j1}⋯λ_{ji}| <= C σ_i(λ|j) for 0 <= i <= k-2.
/// Subsets are enumerated exhaustively for n <= 6 and drawn at random
/// otherwise. The supremum over `samples` points is compared with the one over
/// 2·samples points; stability requires a relative change below `stability`.
AuditReport audit_lemma21(int n, int k, std::size_t samples, std::uint64_t seed, double stability = 0.2);

struct OperatorIdentityOptions {
  std::size_t samples = 10000;
  std::size_t perturbations = 1000;
  double fd_step = 1e-5;
  /// Samples closer than this (along a coordinate axis) to ∂Γ_k are reported
  /// but not held to the gradient tolerance.
  double fd_margin = 1e-2;
  double euler_tolerance = 1e-10;
  double gradient_tolerance = 1e-6;
  double concavity_tolerance = 1e-10;
};

/// Euler identity Σ F^{iī}λ_i = F, gradient against central differences, and
/// concavity of the second variation, for each listed (n, k).
AuditReport audit_operator_identities(const std::vector<std::pair<int, int>>& cases,
                                      const OperatorIdentityOptions& options, std::uint64_t seed);

// --- fields ------------------------------------------------------------------

/// Mixed-wedge gradient inequality: the pointwise constant
/// C = max LHS/RHS (nodes with RHS <= 1e-12·max RHS are skipped) on the grid
/// and on the grid translated by half a cell. Passes if C is finite, the form
/// and eigenframe right-hand sides agree, and the two values of C differ by
/// less than `stability` (relative), or both are below round-off.
AuditReport audit_lemma22(const geometry::Spectral& spectral, const geometry::ScalarField& u,
                          const geometry::MetricField& g, int k, double stability = 0.2);

/// C_emp(p) = LHS/(p·RHS) with LHS = (p²/4)∫e^{-pu}|∂u|²_g dV and
/// RHS = ∫e^{-pu} dV, both rescaled by e^{p·min u}. Passes if every value is
/// finite and max_p C_emp <= factor·C_emp(p_max).
AuditReport audit_cherrier(const geometry::Spectral& spectral, const geometry::ScalarField& u,
                           const geometry::MetricField& g, const std::vector<double>& exponents,
                           double factor = 3.0);

/// Smooth trigonometric probe used by the commutation audit.
geometry::ScalarField commutation_probe(const geometry::TorusGrid& grid);

struct CommutationOptions {
  int n = 2;
  std::vector<geometry::MetricSpec> metrics;
  std::vector<int> samples;  // increasing grid sizes
  std::vector<int> orders = {3, 4};
  double ratio_per_doubling = 10.0;
  double floor_order3 = 1e-10;
  double floor_order4 = 1e-9;
  bool mutation_control = true;
};

/// Residual tables of the commutation identities; passes if each refinement
/// shrinks the residual by ratio_per_doubling^{log2(N'/N)} or both residuals are
/// below the round-off floor. With mutation_control, the order-4 identity with
/// the quadratic torsion term omitted must fail the same criterion on every
/// metric with nonzero torsion.
AuditReport audit_commutation(const CommutationOptions& options);

// --- solution families -------------------------------------------------------

struct FamilyMember {
  double scale = 0.0;
  bool converged = false;
  std::string message;
  double sup_f = 0.0;
  double sup_u = 0.0;
  double b = 0.0;
  double max_ddbar = 0.0;
  double max_gradient_sq = 0.0;
  double final_residual = 0.0;
};

/// Solves the family f_s = s·f̂ for each scale.
std::vector<FamilyMember> solve_family(const solver::SolveConfig& base, const std::vector<double>& scales);

/// sup|u| <= C₀(1 + sup|f|): reports C₀ = max ratio; passes if every member
/// converged and C₀ <= spread·median ratio.
AuditReport audit_c0(const std::vector<FamilyMember>& family, double spread = 10.0);

/// R = Λ/(1+K) with Λ = max|eig(g⁻¹∂∂̄u)| and K = max|∇u|²_g; passes if
/// max R <= spread·median R.
AuditReport audit_c2(const std::vector<FamilyMember>& family, double spread = 10.0);

/// |b| <= sup|f| + log C(n,k) + slack. The bound is enforced on the euclidean
/// metric only; otherwise the empirical constant max(|b| - sup|f|) is reported.
AuditReport audit_b_bound(const std::vector<FamilyMember>& family, int n, int k, bool euclidean,
                          double slack = 1e-6);

}  // namespace khessian::audit
