#include "khessian/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "khessian/errors.hpp"
#include "khessian/operator.hpp"
#include "khessian/symfunc.hpp"

namespace khessian::geometry {

namespace {

using Fields = std::vector<ComplexVec>;

void require_finite(const ScalarField& u, const char* who) {
  if (!u.finite()) throw DomainError(std::string(who) + ": non-finite field values");
}

// Full n×n component array (entry a*n+b) of a Hermitian field.
Fields full_components(const HermitianField& h) {
  const int n = h.dim();
  Fields out(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a <= b) {
        out[static_cast<std::size_t>(a * n + b)] = h.upper(a, b);
      } else {
        const ComplexVec& src = h.upper(b, a);
        ComplexVec c(src.size());
        std::transform(src.begin(), src.end(), c.begin(), [](Complex v) { return std::conj(v); });
        out[static_cast<std::size_t>(a * n + b)] = std::move(c);
      }
    }
  }
  return out;
}

ComplexVec zeros(std::size_t size) { return ComplexVec(size, Complex(0.0, 0.0)); }

double max_abs(const Fields& fs) {
  double m = 0.0;
  for (const auto& f : fs)
    for (Complex v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

HermitianField complex_hessian(const Spectral& spectral, const ScalarField& u) {
  require_finite(u, "complex_hessian");
  const TorusGrid& grid = spectral.grid();
  const int n = grid.n();
  const ComplexVec hat = spectral.forward(u.values());
  HermitianField h(grid, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      ComplexVec v = spectral.apply(hat, spectral.ddbar_symbol(i, j));
      if (i == j)
        for (auto& x : v) x = Complex(x.real(), 0.0);
      h.upper(i, j) = std::move(v);
    }
  }
  return h;
}

std::vector<ComplexVec> dz_gradient(const Spectral& spectral, const ScalarField& u) {
  require_finite(u, "dz_gradient");
  const ComplexVec hat = spectral.forward(u.values());
  std::vector<ComplexVec> out;
  for (int i = 0; i < spectral.grid().n(); ++i) out.push_back(spectral.apply(hat, spectral.dz_symbol(i)));
  return out;
}

std::vector<ComplexVec> dzbar_gradient(const Spectral& spectral, const ScalarField& u) {
  require_finite(u, "dzbar_gradient");
  const ComplexVec hat = spectral.forward(u.values());
  std::vector<ComplexVec> out;
  for (int i = 0; i < spectral.grid().n(); ++i) out.push_back(spectral.apply(hat, spectral.dzbar_symbol(i)));
  return out;
}

ScalarField gradient_norm_sq(const Spectral& spectral, const ScalarField& u, const MetricField& g) {
  const auto du = dz_gradient(spectral, u);
  const int n = g.dim();
  ScalarField out(spectral.grid());
  CVector v(n);
  for (std::size_t node = 0; node < out.size(); ++node) {
    for (int i = 0; i < n; ++i) v(i) = du[static_cast<std::size_t>(i)][node];
    if (g.is_identity()) {
      out[node] = v.squaredNorm();
    } else {
      Eigen::LLT<CMatrix> llt(g.at(node));
      out[node] = std::max(0.0, std::real(v.dot(llt.solve(v))));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ChernTensors::ChernTensors(const Spectral& spectral, const MetricField& g) : n_(g.dim()) {
  const TorusGrid& grid = spectral.grid();
  if (!(grid == g.grid())) throw DomainError("chern_torsion_curvature: grid mismatch");
  const std::size_t size = grid.size();
  const int n = n_;

  metric_ = full_components(g.field());
  HermitianField inv(grid, n);
  for (std::size_t node = 0; node < size; ++node) inv.set(node, g.at(node).inverse());
  inverse_ = full_components(inv);

  // ∂_i g_{jq̄} for every (i, j, q), stored at (i*n + j)*n + q.
  Fields dg(static_cast<std::size_t>(n * n * n));
  for (int j = 0; j < n; ++j)
    for (int q = 0; q < n; ++q) {
      const ComplexVec hat = spectral.forward(metric_[static_cast<std::size_t>(j * n + q)]);
      for (int i = 0; i < n; ++i)
        dg[static_cast<std::size_t>((i * n + j) * n + q)] = spectral.apply(hat, spectral.dz_symbol(i));
    }

  gamma_.assign(static_cast<std::size_t>(n * n * n), zeros(size));
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        ComplexVec& out = gamma_[idx3(p, i, j)];
        for (int q = 0; q < n; ++q) {
          const ComplexVec& ginv = inverse_[static_cast<std::size_t>(q * n + p)];
          const ComplexVec& d = dg[static_cast<std::size_t>((i * n + j) * n + q)];
          for (std::size_t node = 0; node < size; ++node) out[node] += ginv[node] * d[node];
        }
      }

  torsion_.assign(static_cast<std::size_t>(n * n * n), zeros(size));
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const ComplexVec& a = gamma_[idx3(p, i, j)];
        const ComplexVec& b = gamma_[idx3(p, j, i)];
        ComplexVec& t = torsion_[idx3(p, i, j)];
        for (std::size_t node = 0; node < size; ++node) t[node] = a[node] - b[node];
      }

  curvature_.assign(static_cast<std::size_t>(n * n * n * n), ComplexVec());
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const ComplexVec hat = spectral.forward(gamma_[idx3(p, i, k)]);
        for (int j = 0; j < n; ++j) {
          ComplexVec r = spectral.apply(hat, spectral.dzbar_symbol(j));
          for (auto& v : r) v = -v;
          curvature_[static_cast<std::size_t>(((i * n + j) * n + k) * n + p)] = std::move(r);
        }
      }
}

double ChernTensors::max_abs_torsion() const { return max_abs(torsion_); }
double ChernTensors::max_abs_curvature() const { return max_abs(curvature_); }

ChernTensors chern_torsion_curvature(const Spectral& spectral, const MetricField& g) {
  return ChernTensors(spectral, g);
}

// ---------------------------------------------------------------------------

double commutation_residual(const Spectral& spectral, const ScalarField& u, const MetricField& g,
                            int order, TorsionSquaredTerm variant) {
  if (order != 3 && order != 4) throw DomainError("commutation_residual: order must be 3 or 4");
  const ChernTensors chern(spectral, g);
  const int n = g.dim();
  const std::size_t size = spectral.grid().size();
  const auto at2 = [n](int a, int b) { return static_cast<std::size_t>(a * n + b); };
  const auto at3 = [n](int a, int b, int c) { return static_cast<std::size_t>((a * n + b) * n + c); };

  const Fields hess = full_components(complex_hessian(spectral, u));
  Fields hess_hat(hess.size());
  for (std::size_t c = 0; c < hess.size(); ++c) hess_hat[c] = spectral.forward(hess[c]);

  // Mixed tensor a_i^k = g^{km̄} u_{im̄}.
  Fields mixed(static_cast<std::size_t>(n * n), zeros(size));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) {
        const ComplexVec& ginv = chern.inverse(m, k);
        const ComplexVec& h = hess[at2(i, m)];
        ComplexVec& out = mixed[at2(i, k)];
        for (std::size_t node = 0; node < size; ++node) out[node] += ginv[node] * h[node];
      }

  // Left side u_{ij̄l} = g_{kj̄} ∇_l a_i^k, stored at (i, j, l).
  Fields lhs3(static_cast<std::size_t>(n * n * n), zeros(size));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const ComplexVec hat = spectral.forward(mixed[at2(i, k)]);
      for (int l = 0; l < n; ++l) {
        ComplexVec cov = spectral.apply(hat, spectral.dz_symbol(l));
        for (int p = 0; p < n; ++p) {
          const ComplexVec& g1 = chern.gamma(p, l, i);
          const ComplexVec& a1 = mixed[at2(p, k)];
          const ComplexVec& g2 = chern.gamma(k, l, p);
          const ComplexVec& a2 = mixed[at2(i, p)];
          for (std::size_t node = 0; node < size; ++node)
            cov[node] += -g1[node] * a1[node] + g2[node] * a2[node];
        }
        for (int j = 0; j < n; ++j) {
          const ComplexVec& gkj = chern.metric(k, j);
          ComplexVec& out = lhs3[at3(i, j, l)];
          for (std::size_t node = 0; node < size; ++node) out[node] += gkj[node] * cov[node];
        }
      }
    }

  // Direct u_{lj̄i} = ∂_i u_{lj̄} - Γ^p_{il} u_{pj̄}, stored at (l, j, i).
  Fields direct3(static_cast<std::size_t>(n * n * n));
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        ComplexVec v = spectral.apply(hess_hat[at2(l, j)], spectral.dz_symbol(i));
        for (int p = 0; p < n; ++p) {
          const ComplexVec& gam = chern.gamma(p, i, l);
          const ComplexVec& h = hess[at2(p, j)];
          for (std::size_t node = 0; node < size; ++node) v[node] -= gam[node] * h[node];
        }
        direct3[at3(l, j, i)] = std::move(v);
      }

  double residual = 0.0;
  if (order == 3) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const ComplexVec& left = lhs3[at3(i, j, l)];
          const ComplexVec& right = direct3[at3(l, j, i)];
          for (std::size_t node = 0; node < size; ++node) {
            Complex r = left[node] - right[node];
            for (int p = 0; p < n; ++p) r += chern.torsion(p, l, i)[node] * hess[at2(p, j)][node];
            residual = std::max(residual, std::abs(r));
          }
        }
    return residual;
  }

  const double tt_sign = variant == TorsionSquaredTerm::kFull      ? 1.0
                         : variant == TorsionSquaredTerm::kOmitted ? 0.0
                                                                   : -1.0;

  // u_{pm̄j̄} = ∂_j̄ u_{pm̄} - conj(Γ^q_{jm}) u_{pq̄}, stored at (p, m, j).
  Fields dbar2(static_cast<std::size_t>(n * n * n));
  for (int p = 0; p < n; ++p)
    for (int m = 0; m < n; ++m)
      for (int j = 0; j < n; ++j) {
        ComplexVec v = spectral.apply(hess_hat[at2(p, m)], spectral.dzbar_symbol(j));
        for (int q = 0; q < n; ++q) {
          const ComplexVec& gam = chern.gamma(q, j, m);
          const ComplexVec& h = hess[at2(p, q)];
          for (std::size_t node = 0; node < size; ++node) v[node] -= std::conj(gam[node]) * h[node];
        }
        dbar2[at3(p, m, j)] = std::move(v);
      }

  // ∂_m̄ of the left and right third-order tensors.
  Fields lhs3_hat(lhs3.size()), direct3_hat(direct3.size());
  for (std::size_t c = 0; c < lhs3.size(); ++c) {
    lhs3_hat[c] = spectral.forward(lhs3[c]);
    direct3_hat[c] = spectral.forward(direct3[c]);
  }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) {
          // u_{ij̄lm̄} = ∂_m̄ u_{ij̄l} - conj(Γ^q_{mj}) u_{iq̄l}
          const ComplexVec left = spectral.apply(lhs3_hat[at3(i, j, l)], spectral.dzbar_symbol(m));
          // u_{lm̄ij̄} = ∂_j̄ u_{lm̄i} - conj(Γ^q_{jm}) u_{lq̄i}
          const ComplexVec swapped = spectral.apply(direct3_hat[at3(l, m, i)], spectral.dzbar_symbol(j));
          for (std::size_t node = 0; node < size; ++node) {
            Complex lhs = left[node];
            Complex rhs = swapped[node];
            for (int q = 0; q < n; ++q) {
              lhs -= std::conj(chern.gamma(q, m, j)[node]) * lhs3[at3(i, q, l)][node];
              rhs -= std::conj(chern.gamma(q, j, m)[node]) * direct3[at3(l, q, i)][node];
            }
            for (int p = 0; p < n; ++p) {
              rhs += chern.curvature(l, m, i, p)[node] * hess[at2(p, j)][node];
              rhs -= chern.curvature(i, j, l, p)[node] * hess[at2(p, m)][node];
              rhs -= chern.torsion(p, l, i)[node] * dbar2[at3(p, m, j)][node];
              rhs -= std::conj(chern.torsion(p, m, j)[node]) * direct3[at3(l, p, i)][node];
              if (tt_sign != 0.0)
                for (int q = 0; q < n; ++q)
                  rhs += tt_sign * chern.torsion(p, l, i)[node] * std::conj(chern.torsion(q, m, j)[node]) *
                         hess[at2(p, q)][node];
            }
            residual = std::max(residual, std::abs(lhs - rhs));
          }
        }
  return residual;
}

// ---------------------------------------------------------------------------

double integrate(const ScalarField& field, const MetricField& g) {
  if (!(field.grid() == g.grid())) throw DomainError("integrate: grid mismatch");
  double sum = 0.0;
  for (std::size_t node = 0; node < field.size(); ++node) {
    const double det = g.is_identity() ? 1.0 : std::real(g.at(node).determinant());
    sum += field[node] * det;
  }
  return sum / static_cast<double>(field.size());
}

ScalarField cone_band_integrand(const Spectral& spectral, const ScalarField& u, const MetricField& g,
                                int i, int k) {
  const int n = g.dim();
  if (k < 2 || k > n) throw DomainError("cone_band_integrand: requires 2 <= k <= n");
  if (i < 0 || i > k - 2) throw DomainError("cone_band_integrand: requires 0 <= i <= k-2");
  const HermitianField hess = complex_hessian(spectral, u);
  const auto du = dz_gradient(spectral, u);
  ScalarField out(spectral.grid());
  RVector lambda;
  CMatrix basis;
  CVector grad(n);
  for (std::size_t node = 0; node < out.size(); ++node) {
    const CMatrix gm = g.at(node);
    const CMatrix w = gm + hess.matrix(node);
    if (!operators::relative_spectrum(gm, w, lambda, &basis))
      throw DomainError("cone_band_integrand: metric not positive definite");
    std::vector<double> lam(lambda.data(), lambda.data() + n);
    if (!symfunc::in_gamma_k(lam, k))
      throw DomainError("cone_band_integrand: omega_u leaves Gamma_k at node " + std::to_string(node));
    for (int a = 0; a < n; ++a) grad(a) = du[static_cast<std::size_t>(a)][node];
    const CVector frame = basis.adjoint() * grad;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const std::size_t excl[] = {static_cast<std::size_t>(j)};
      acc += symfunc::sigma_restricted(i, lam, excl) * std::norm(frame(j));
    }
    out[node] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

ComplexVec translate_complex(const Spectral& spectral, const ComplexVec& f, double cells) {
  const TorusGrid& grid = spectral.grid();
  ComplexVec hat = spectral.forward(f);
  const double scale = 2.0 * std::numbers::pi * cells / grid.samples();
  for (std::size_t node = 0; node < hat.size(); ++node) {
    double phase = 0.0;
    for (int axis = 0; axis < grid.axes(); ++axis) phase += spectral.wavenumber(node, axis);
    hat[node] *= std::polar(1.0, scale * phase);
  }
  return spectral.backward(std::move(hat));
}

}  // namespace

ScalarField translated(const Spectral& spectral, const ScalarField& f, double cells) {
  const ComplexVec out = translate_complex(spectral, to_complex(f.values()), cells);
  return ScalarField(spectral.grid(), real_part(out));
}

MetricField translated(const Spectral& spectral, const MetricField& g, double cells) {
  HermitianField out(spectral.grid(), g.dim());
  for (int i = 0; i < g.dim(); ++i)
    for (int j = i; j < g.dim(); ++j) {
      ComplexVec v = translate_complex(spectral, g.field().upper(i, j), cells);
      if (i == j)
        for (auto& x : v) x = Complex(x.real(), 0.0);
      out.upper(i, j) = std::move(v);
    }
  return MetricField(std::move(out));
}

}  // namespace khessian::geometry
