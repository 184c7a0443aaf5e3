#include "khessian/krylov.hpp"

#include <cmath>
#include <vector>

namespace khessian::solver {

GmresResult gmres(const LinearMap& apply, const LinearMap& precondition, const Eigen::VectorXd& rhs,
                  const GmresOptions& options) {
  const Eigen::Index size = rhs.size();
  GmresResult result;
  result.x = Eigen::VectorXd::Zero(size);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    result.converged = true;
    return result;
  }
  const double target = options.relative_tolerance * rhs_norm;
  const int m = std::max(1, options.restart);

  Eigen::VectorXd r = rhs, w(size), z(size), az(size);
  std::vector<Eigen::VectorXd> basis;
  Eigen::MatrixXd hess(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), gvec(m + 1);

  while (result.iterations < options.max_iterations) {
    double beta = r.norm();
    if (beta <= target) break;
    basis.assign(1, r / beta);
    hess.setZero();
    gvec.setZero();
    gvec(0) = beta;
    int j = 0;
    for (; j < m && result.iterations < options.max_iterations; ++j) {
      ++result.iterations;
      precondition(basis[static_cast<std::size_t>(j)], z);
      apply(z, w);
      // Modified Gram-Schmidt.
      for (int i = 0; i <= j; ++i) {
        hess(i, j) = w.dot(basis[static_cast<std::size_t>(i)]);
        w -= hess(i, j) * basis[static_cast<std::size_t>(i)];
      }
      hess(j + 1, j) = w.norm();
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * hess(i, j) + sn(i) * hess(i + 1, j);
        hess(i + 1, j) = -sn(i) * hess(i, j) + cs(i) * hess(i + 1, j);
        hess(i, j) = t;
      }
      const double denom = std::hypot(hess(j, j), hess(j + 1, j));
      cs(j) = denom == 0.0 ? 1.0 : hess(j, j) / denom;
      sn(j) = denom == 0.0 ? 0.0 : hess(j + 1, j) / denom;
      const double next = hess(j + 1, j);
      hess(j, j) = cs(j) * hess(j, j) + sn(j) * next;
      hess(j + 1, j) = 0.0;
      gvec(j + 1) = -sn(j) * gvec(j);
      gvec(j) = cs(j) * gvec(j);
      if (std::abs(gvec(j + 1)) <= target || next == 0.0) {
        ++j;
        break;
      }
      basis.push_back(w / next);
    }
    // Back substitution for the least-squares coefficients.
    Eigen::VectorXd y = hess.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(gvec.head(j));
    Eigen::VectorXd update = Eigen::VectorXd::Zero(size);
    for (int i = 0; i < j; ++i) update += y(i) * basis[static_cast<std::size_t>(i)];
    precondition(update, z);
    result.x += z;
    apply(result.x, az);
    r = rhs - az;
    if (r.norm() <= target) break;
  }
  result.relative_residual = r.norm() / rhs_norm;
  result.converged = result.relative_residual <= options.relative_tolerance;
  return result;
}

}  // namespace khessian::solver
