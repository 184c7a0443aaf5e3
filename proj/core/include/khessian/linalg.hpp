#pragma once

#include <complex>

#include <Eigen/Dense>

namespace khessian {

using Complex = std::complex<double>;

/// Upper bound on the matrix dimension handled pointwise; keeps the small
/// per-node matrices on the stack.
inline constexpr int kMaxDim = 8;

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using RMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using RVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// ‖A - Aᴴ‖_max / max(1, ‖A‖_max).
double hermiticity_residual(const CMatrix& a);

/// n×n complex matrix equal to its conjugate transpose. Construction checks
/// the residual against 1e-12 and then symmetrizes exactly.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const CMatrix& m);
  static HermitianMatrix identity(int n);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }

 private:
  CMatrix m_;
};

}  // namespace khessian
