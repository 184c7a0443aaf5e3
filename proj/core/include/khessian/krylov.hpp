#pragma once

#include <functional>

#include <Eigen/Dense>

namespace khessian::solver {

using LinearMap = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct GmresOptions {
  double relative_tolerance = 1e-10;
  int restart = 50;
  int max_iterations = 200;
};

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning: solves A x = rhs by iterating on
/// A M y = rhs with x = M y. `precondition` applies M (an approximate inverse).
/// The reported residual is the true ‖rhs - A x‖ / ‖rhs‖ at exit.
GmresResult gmres(const LinearMap& apply, const LinearMap& precondition, const Eigen::VectorXd& rhs,
                  const GmresOptions& options);

}  // namespace khessian::solver
