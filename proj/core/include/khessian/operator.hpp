#pragma once

#include <vector>

#include "khessian/linalg.hpp"
#include "khessian/symfunc.hpp"

namespace khessian::operators {

using symfunc::ConeLevel;
using symfunc::Spectrum;

/// σ_k below this is treated as the cone boundary and rejected.
inline constexpr double kBoundaryGuard = 1e-14;

/// Eigen-decomposition of the endomorphism g⁻¹w.
/// Columns v_a of `basis` solve w v = λ g v with vᴴ g v = 1; the tangent
/// frame vector with components ξ^i is conj(v_a).
struct RelativeEigen {
  Spectrum spectrum;
  CMatrix basis;
};

RelativeEigen relative_eigenvalues(const HermitianMatrix& g, const HermitianMatrix& w);

/// F = σ_k(λ)^{1/k}.
double f_value(const Spectrum& lambda, ConeLevel k);

/// F^{iī} = (1/k) σ_k^{1/k-1} σ_{k-1}(λ|i) in the eigenframe.
std::vector<double> f_gradient(const Spectrum& lambda, ConeLevel k);

/// Nonzero second derivatives in the eigenframe: diag(i,p) = F^{iī,pp̄},
/// off(i,p) = F^{ip̄,pī} (off(i,i) is unused and left 0).
struct FHessian {
  RMatrix diag;
  RMatrix off;
};

FHessian f_hessian(const Spectrum& lambda, ConeLevel k);

/// Σ diag(i,p) a_i a_p + Σ_{i≠p} off(i,p) |b_ip|², the second variation of F
/// along the Hermitian direction with diagonal a and off-diagonal b.
double hessian_quadratic_form(const FHessian& h, const RVector& a, const CMatrix& b);

/// Frobenius-type norm of the quadratic form coefficients.
double hessian_norm(const FHessian& h);

/// min_i F^{iī}; requires Σ_i F^{iī} <= trace_cap.
double garding_floor(const Spectrum& lambda, ConeLevel k, double trace_cap);

/// Full evaluation at a point.
struct OperatorEval {
  double value = 0.0;
  /// Coordinate-frame F^{ij̄} = ∂F/∂w_{ij̄}; δF = Σ_ij F^{ij̄} δw_{ij̄}.
  CMatrix gradient;
  Spectrum spectrum;
  CMatrix basis;
  std::vector<double> frame_gradient;
  FHessian hessian;
};

OperatorEval evaluate(const HermitianMatrix& g, const HermitianMatrix& w, ConeLevel k);

/// Non-throwing kernel used on grids. `gradient_out`, when given, receives the
/// coordinate-frame F^{ij̄} (only when the point is inside the cone).
struct PointResult {
  bool in_cone = false;
  bool positive_metric = true;
  double value = 0.0;
  double sigma_k = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

PointResult evaluate_point(const CMatrix& g, const CMatrix& w, int k, CMatrix* gradient_out);

/// Eigenvalues (descending) of g⁻¹w; returns false if g is not positive definite.
bool relative_spectrum(const CMatrix& g, const CMatrix& w, RVector& lambda, CMatrix* basis);

}  // namespace khessian::operators
