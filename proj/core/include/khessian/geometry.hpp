#pragma once

#include <vector>

#include "khessian/metric.hpp"
#include "khessian/torus.hpp"

namespace khessian::geometry {

/// u_{ij̄} = ∂²u/∂z^i∂z̄^j at every node. The upper triangle is computed
/// spectrally and the lower one filled by conjugation.
HermitianField complex_hessian(const Spectral& spectral, const ScalarField& u);

/// u_i = ∂u/∂z^i, one field per i.
std::vector<ComplexVec> dz_gradient(const Spectral& spectral, const ScalarField& u);
/// u_ī = ∂u/∂z̄^i, one field per i.
std::vector<ComplexVec> dzbar_gradient(const Spectral& spectral, const ScalarField& u);

/// |∇u|²_g = g^{ij̄} u_i u_j̄.
ScalarField gradient_norm_sq(const Spectral& spectral, const ScalarField& u, const MetricField& g);

/// Chern connection data of a metric field. Component fields are stored flat;
/// indices are 0-based.
class ChernTensors {
 public:
  ChernTensors(const Spectral& spectral, const MetricField& g);

  int dim() const { return n_; }
  /// Γ^p_{ij} = g^{pq̄} ∂_i g_{jq̄}
  const ComplexVec& gamma(int p, int i, int j) const { return gamma_[idx3(p, i, j)]; }
  /// T^p_{ij} = Γ^p_{ij} - Γ^p_{ji}
  const ComplexVec& torsion(int p, int i, int j) const { return torsion_[idx3(p, i, j)]; }
  /// R_{ij̄k}{}^p = -∂_j̄ Γ^p_{ik}
  const ComplexVec& curvature(int i, int j, int k, int p) const {
    return curvature_[static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + p)];
  }
  /// Components of g and g⁻¹ as full n×n arrays of fields; entry (a, b) is
  /// g_{ab̄} and the matrix inverse (g⁻¹)(a, b) = g^{bā} respectively.
  const ComplexVec& metric(int a, int b) const { return metric_[static_cast<std::size_t>(a * n_ + b)]; }
  const ComplexVec& inverse(int a, int b) const { return inverse_[static_cast<std::size_t>(a * n_ + b)]; }

  double max_abs_torsion() const;
  double max_abs_curvature() const;

 private:
  std::size_t idx3(int p, int i, int j) const { return static_cast<std::size_t>((p * n_ + i) * n_ + j); }

  int n_;
  std::vector<ComplexVec> metric_, inverse_;
  std::vector<ComplexVec> gamma_, torsion_, curvature_;
};

ChernTensors chern_torsion_curvature(const Spectral& spectral, const MetricField& g);

/// How the quadratic torsion term of the fourth-order identity is assembled.
/// Only kFull is the correct identity; the others exist as mutation controls.
enum class TorsionSquaredTerm { kFull, kOmitted, kSignFlipped };

/// Sup-norm residual of the third- or fourth-order commutation identity for
/// Chern covariant derivatives of u. The left side u_{ij̄l} is formed by raising
/// the barred index, differentiating the mixed tensor and lowering again; the
/// right side is built from u_{lj̄i} directly. Both agree in the continuum, so
/// the residual measures discretization error only.
double commutation_residual(const Spectral& spectral, const ScalarField& u, const MetricField& g,
                            int order, TorsionSquaredTerm variant = TorsionSquaredTerm::kFull);

/// ∫ field · det g over the unit torus (trapezoidal rule).
double integrate(const ScalarField& field, const MetricField& g);

/// Σ_j σ_i(λ|j) |ũ_j|², where λ are the eigenvalues of g⁻¹(g + ∂∂̄u) and ũ_j is
/// the derivative of u along the j-th g-unit eigenvector. Multiplying by
/// i!(n-i-1)!/n! gives √-1 ∂u∧∂̄u∧ω_u^i∧ω^{n-i-1}/ω^n.
/// Throws DomainError if ω_u leaves Γ_k at some node or 0 <= i <= k-2 fails.
ScalarField cone_band_integrand(const Spectral& spectral, const ScalarField& u, const MetricField& g,
                                int i, int k);

/// Fourier-interpolated translate of a field by `cells` grid spacings along
/// every real axis.
ScalarField translated(const Spectral& spectral, const ScalarField& f, double cells);
MetricField translated(const Spectral& spectral, const MetricField& g, double cells);

}  // namespace khessian::geometry
