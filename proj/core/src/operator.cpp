#include "khessian/operator.hpp"

#include <array>
#include <cmath>
#include <string>

#include "khessian/errors.hpp"

namespace khessian {

double hermiticity_residual(const CMatrix& a) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

HermitianMatrix::HermitianMatrix(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1 || m.rows() > kMaxDim)
    throw DomainError("HermitianMatrix: must be square with 1 <= n <= " + std::to_string(kMaxDim));
  if (hermiticity_residual(m) > 1e-12) throw DomainError("HermitianMatrix: input is not Hermitian");
  m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::identity(int n) {
  return HermitianMatrix(CMatrix::Identity(n, n));
}

}  // namespace khessian

namespace khessian::operators {

namespace {

using Elem = std::array<double, kMaxDim + 1>;

// σ_0..σ_kmax of λ with the entries flagged in `skip` treated as zero.
Elem elementary(const RVector& lambda, int kmax, int skip_a = -1, int skip_b = -1) {
  Elem e{};
  e[0] = 1.0;
  int seen = 0;
  for (int i = 0; i < lambda.size(); ++i) {
    if (i == skip_a || i == skip_b) continue;
    ++seen;
    const double x = lambda(i);
    for (int j = std::min(seen, kmax); j >= 1; --j) e[j] += x * e[j - 1];
  }
  return e;
}

RVector to_rvector(const Spectrum& s) {
  RVector v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

void require_cone(const Spectrum& lambda, ConeLevel k, const char* who) {
  if (k.value() > static_cast<int>(lambda.size()))
    throw DomainError(std::string(who) + ": k exceeds n");
  if (!symfunc::in_gamma_k(lambda, k))
    throw DomainError(std::string(who) + ": spectrum outside Gamma_k");
  if (symfunc::sigma(k.value(), lambda) < kBoundaryGuard)
    throw DomainError(std::string(who) + ": sigma_k below boundary guard");
}

// Gradient entries f_i = (1/k) σ_k^{1/k-1} σ_{k-1}(λ|i).
void frame_gradient(const RVector& lambda, int k, double sk, double* out) {
  const double pref = std::pow(sk, 1.0 / k - 1.0) / k;
  for (int i = 0; i < lambda.size(); ++i) out[i] = pref * elementary(lambda, k - 1, i)[k - 1];
}

}  // namespace

bool relative_spectrum(const CMatrix& g, const CMatrix& w, RVector& lambda, CMatrix* basis) {
  Eigen::LLT<CMatrix> llt(g);
  if (llt.info() != Eigen::Success) return false;
  const auto lower = llt.matrixL();
  for (int i = 0; i < g.rows(); ++i)
    if (!(std::real(llt.matrixLLT()(i, i)) > 0.0)) return false;
  const CMatrix x = lower.solve(w);
  CMatrix a = lower.solve(CMatrix(x.adjoint()));
  a = 0.5 * (a + a.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, basis ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  const int n = static_cast<int>(g.rows());
  lambda.resize(n);
  for (int i = 0; i < n; ++i) lambda(i) = es.eigenvalues()(n - 1 - i);
  if (basis) {
    CMatrix y(n, n);
    for (int i = 0; i < n; ++i) y.col(i) = es.eigenvectors().col(n - 1 - i);
    *basis = llt.matrixU().solve(y);  // L⁻ᴴ y
  }
  return true;
}

RelativeEigen relative_eigenvalues(const HermitianMatrix& g, const HermitianMatrix& w) {
  if (g.dim() != w.dim()) throw DomainError("relative_eigenvalues: dimension mismatch");
  RVector lambda;
  CMatrix basis;
  if (!relative_spectrum(g.matrix(), w.matrix(), lambda, &basis))
    throw DomainError("relative_eigenvalues: g is not positive definite");
  return RelativeEigen{Spectrum(std::vector<double>(lambda.data(), lambda.data() + lambda.size())),
                       basis};
}

double f_value(const Spectrum& lambda, ConeLevel k) {
  require_cone(lambda, k, "f_value");
  return std::pow(symfunc::sigma(k.value(), lambda), 1.0 / k.value());
}

std::vector<double> f_gradient(const Spectrum& lambda, ConeLevel k) {
  require_cone(lambda, k, "f_gradient");
  const RVector l = to_rvector(lambda);
  std::vector<double> out(lambda.size());
  frame_gradient(l, k.value(), symfunc::sigma(k.value(), lambda), out.data());
  return out;
}

FHessian f_hessian(const Spectrum& lambda, ConeLevel k) {
  require_cone(lambda, k, "f_hessian");
  const int n = static_cast<int>(lambda.size());
  const int kv = k.value();
  const RVector l = to_rvector(lambda);
  const double sk = symfunc::sigma(kv, lambda);
  const double inv_k = 1.0 / kv;
  const double p1 = inv_k * std::pow(sk, inv_k - 1.0);
  const double p2 = inv_k * (inv_k - 1.0) * std::pow(sk, inv_k - 2.0);

  std::vector<double> s1(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s1[i] = elementary(l, kv - 1, i)[kv - 1];

  FHessian h{RMatrix::Zero(n, n), RMatrix::Zero(n, n)};
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < n; ++p) {
      const double s2 = (i != p && kv >= 2) ? elementary(l, kv - 2, i, p)[kv - 2] : 0.0;
      h.diag(i, p) = p1 * s2 + p2 * s1[i] * s1[p];
      if (i != p) h.off(i, p) = -p1 * s2;
    }
  }
  return h;
}

double hessian_quadratic_form(const FHessian& h, const RVector& a, const CMatrix& b) {
  const int n = static_cast<int>(h.diag.rows());
  double q = 0.0;
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p) {
      q += h.diag(i, p) * a(i) * a(p);
      if (i != p) q += h.off(i, p) * std::norm(b(i, p));
    }
  return q;
}

double hessian_norm(const FHessian& h) {
  return std::sqrt(h.diag.squaredNorm() + h.off.squaredNorm());
}

double garding_floor(const Spectrum& lambda, ConeLevel k, double trace_cap) {
  const auto grad = f_gradient(lambda, k);
  double trace = 0.0;
  double floor = grad.front();
  for (double v : grad) {
    trace += v;
    floor = std::min(floor, v);
  }
  if (trace > trace_cap) throw DomainError("garding_floor: trace of F^{ii} exceeds trace_cap");
  return floor;
}

OperatorEval evaluate(const HermitianMatrix& g, const HermitianMatrix& w, ConeLevel k) {
  auto eig = relative_eigenvalues(g, w);
  const double value = f_value(eig.spectrum, k);
  auto fg = f_gradient(eig.spectrum, k);
  const int n = g.dim();
  CMatrix grad = CMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        grad(i, j) += fg[a] * std::conj(eig.basis(i, a)) * eig.basis(j, a);
  auto hess = f_hessian(eig.spectrum, k);
  return OperatorEval{value, grad, eig.spectrum, eig.basis, std::move(fg), std::move(hess)};
}

PointResult evaluate_point(const CMatrix& g, const CMatrix& w, int k, CMatrix* gradient_out) {
  PointResult r;
  RVector lambda;
  CMatrix basis;
  if (!relative_spectrum(g, w, lambda, gradient_out ? &basis : nullptr)) {
    r.positive_metric = false;
    return r;
  }
  const int n = static_cast<int>(lambda.size());
  r.lambda_max = lambda(0);
  r.lambda_min = lambda(n - 1);
  const Elem e = elementary(lambda, k);
  r.sigma_k = e[k];
  r.in_cone = true;
  for (int j = 1; j <= k; ++j)
    if (!(e[j] > 0.0)) r.in_cone = false;
  if (!r.in_cone || e[k] < kBoundaryGuard) {
    r.in_cone = false;
    return r;
  }
  r.value = std::pow(e[k], 1.0 / k);
  if (gradient_out) {
    std::array<double, kMaxDim> f{};
    frame_gradient(lambda, k, e[k], f.data());
    CMatrix& grad = *gradient_out;
    grad.setZero(n, n);
    for (int a = 0; a < n; ++a) {
      const auto col = basis.col(a);
      for (int i = 0; i < n; ++i) {
        const Complex ci = f[a] * std::conj(col(i));
        for (int j = 0; j < n; ++j) grad(i, j) += ci * col(j);
      }
    }
  }
  return r;
}

}  // namespace khessian::operators
