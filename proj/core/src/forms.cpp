#include "khessian/forms.hpp"

#include <bit>
#include <cmath>

#include "khessian/errors.hpp"
#include "khessian/symfunc.hpp"

namespace khessian::forms {

using geometry::ComplexVec;

namespace {
const Complex kI(0.0, 1.0);

double factorial(int m) {
  double f = 1.0;
  for (int a = 2; a <= m; ++a) f *= a;
  return f;
}
}  // namespace

int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  // Count pairs (x in a, y in b) with x > y; each costs one transposition.
  int swaps = 0;
  for (Mask rest = b; rest; rest &= rest - 1) {
    const Mask low = rest & (~rest + 1);
    swaps += std::popcount(a & ~((low << 1) - 1));
  }
  return (swaps % 2) ? -1 : 1;
}

Form::Form(int n) : n_(n), coeff_(std::size_t{1} << (2 * n), Complex(0.0, 0.0)) {
  if (n < 1 || n > 8) throw DomainError("Form: dimension out of range");
}

bool Form::is_zero() const {
  for (Complex c : coeff_)
    if (c != Complex(0.0, 0.0)) return false;
  return true;
}

Form Form::wedge(const Form& other) const {
  if (other.n_ != n_) throw DomainError("Form::wedge: dimension mismatch");
  std::vector<Mask> left, right;
  for (Mask m = 0; m < coeff_.size(); ++m) {
    if (coeff_[m] != Complex(0.0, 0.0)) left.push_back(m);
    if (other.coeff_[m] != Complex(0.0, 0.0)) right.push_back(m);
  }
  Form out(n_);
  for (Mask a : left)
    for (Mask b : right) {
      const int s = wedge_sign(a, b);
      if (s != 0) out.coeff_[a | b] += static_cast<double>(s) * coeff_[a] * other.coeff_[b];
    }
  return out;
}

Form& Form::operator+=(const Form& other) {
  for (std::size_t m = 0; m < coeff_.size(); ++m) coeff_[m] += other.coeff_[m];
  return *this;
}

Form& Form::operator*=(Complex s) {
  for (auto& c : coeff_) c *= s;
  return *this;
}

Form hermitian_two_form(const CMatrix& m) {
  const int n = static_cast<int>(m.rows());
  Form f(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Mask a = dz_bit(i), b = dzbar_bit(j);
      f.add(a | b, static_cast<double>(wedge_sign(a, b)) * kI * m(i, j));
    }
  return f;
}

Form monomial(int n, const std::vector<Mask>& gens, Complex c) {
  Form f(n);
  Mask acc = 0;
  int sign = 1;
  for (Mask g : gens) {
    const int s = wedge_sign(acc, g);
    if (s == 0) return f;
    sign *= s;
    acc |= g;
  }
  f.add(acc, static_cast<double>(sign) * c);
  return f;
}

Form power(const Form& f, int p) {
  Form out(f.n());
  out.add(0, 1.0);
  for (int a = 0; a < p; ++a) out = out.wedge(f);
  return out;
}

Form FormField::at(std::size_t node) const {
  Form f(n);
  for (const auto& [mask, field] : comps) f.add(mask, field[node]);
  return f;
}

MetricForms metric_forms(const geometry::Spectral& spectral, const geometry::MetricField& g) {
  const int n = g.dim();
  const std::size_t size = spectral.grid().size();
  MetricForms out{{n, {}}, {n, {}}, {n, {}}};
  auto accumulate = [&](FormField& ff, const std::vector<Mask>& gens, Complex c, const ComplexVec& field) {
    const Form mono = monomial(n, gens, 1.0);
    for (Mask m = 0; m < (Mask{1} << (2 * n)); ++m) {
      const Complex s = mono.coefficient(m);
      if (s == Complex(0.0, 0.0)) continue;
      auto [it, fresh] = ff.comps.try_emplace(m, ComplexVec(size, Complex(0.0, 0.0)));
      (void)fresh;
      for (std::size_t node = 0; node < size; ++node) it->second[node] += s * c * field[node];
    }
  };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ComplexVec comp(size);
      for (std::size_t node = 0; node < size; ++node) comp[node] = g.field().at(node, i, j);
      const ComplexVec hat = spectral.forward(comp);
      for (int l = 0; l < n; ++l) {
        const ComplexVec d = spectral.apply(hat, spectral.dz_symbol(l));
        accumulate(out.d_omega, {dz_bit(l), dz_bit(i), dzbar_bit(j)}, kI, d);
        const ComplexVec db = spectral.apply(hat, spectral.dzbar_symbol(l));
        accumulate(out.dbar_omega, {dzbar_bit(l), dz_bit(i), dzbar_bit(j)}, kI, db);
        const ComplexVec dhat = spectral.forward(d);
        for (int m = 0; m < n; ++m) {
          // ∂̄(∂_l g dz^l∧…) = ∂_m̄∂_l g dz̄^m∧dz^l∧…
          const ComplexVec dd = spectral.apply(dhat, spectral.dzbar_symbol(m));
          accumulate(out.ddbar_omega, {dzbar_bit(m), dz_bit(l), dz_bit(i), dzbar_bit(j)}, -kI, dd);
        }
      }
    }
  return out;
}

Form torsion_form(const Form& omega, const Form& d_omega, const Form& dbar_omega, const Form& ddbar_omega,
                  int i) {
  const int n = omega.n();
  const int budget = n - i - 1;
  Form total(n);
  for (int p = 0; p <= 1; ++p)
    for (int q = 0; q <= 1; ++q) {
      if (p == 0 && q == 0) continue;
      const int rest = budget - 3 * p - 2 * q;
      if (rest < 0) continue;
      Form term = power(omega, rest);
      if (p == 1) {
        Form pair = d_omega.wedge(dbar_omega);
        pair *= kI;
        term = term.wedge(pair);
      }
      if (q == 1) {
        Form dd = ddbar_omega;
        dd *= kI;
        term = term.wedge(dd);
      }
      total += term;
    }
  return total;
}

WedgeSides gradient_wedge_sides(const geometry::Spectral& spectral, const geometry::ScalarField& u,
                                const geometry::MetricField& g, int k) {
  const int n = g.dim();
  if (k < 2 || k > n) throw DomainError("gradient_wedge_sides: requires 2 <= k <= n");
  const auto& grid = spectral.grid();
  const MetricForms mf = metric_forms(spectral, g);
  const geometry::HermitianField hess = geometry::complex_hessian(spectral, u);
  const auto du = geometry::dz_gradient(spectral, u);

  WedgeSides out{geometry::ScalarField(grid), geometry::ScalarField(grid), geometry::ScalarField(grid)};
  for (int i = 0; i <= k - 2; ++i) {
    const double norm = factorial(i) * factorial(n - i - 1) / factorial(n);
    out.rhs_eigen += norm * geometry::cone_band_integrand(spectral, u, g, i, k);
  }

  CMatrix grad_outer(n, n);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const CMatrix gm = g.at(node);
    const Form omega = hermitian_two_form(gm);
    const Form omega_u = hermitian_two_form(gm + hess.matrix(node));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) grad_outer(a, b) = du[a][node] * std::conj(du[b][node]);
    const Form dudu = hermitian_two_form(grad_outer);  // √-1 ∂u∧∂̄u
    const Complex volume = power(omega, n).top();
    const Form d = mf.d_omega.at(node);
    const Form db = mf.dbar_omega.at(node);
    const Form ddb = mf.ddbar_omega.at(node);

    double lhs = 0.0, rhs = 0.0;
    Form omega_u_pow(n);
    omega_u_pow.add(0, 1.0);
    for (int i = 0; i <= k - 2; ++i) {
      const Form base = dudu.wedge(omega_u_pow);
      const Form t = torsion_form(omega, d, db, ddb, i);
      if (!t.is_zero()) lhs += std::abs(base.wedge(t).top() / volume);
      rhs += std::real(base.wedge(power(omega, n - i - 1)).top() / volume);
      omega_u_pow = omega_u_pow.wedge(omega_u);
    }
    out.lhs[node] = lhs;
    out.rhs[node] = rhs;
  }
  return out;
}

}  // namespace khessian::forms
