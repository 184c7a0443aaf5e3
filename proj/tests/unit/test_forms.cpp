#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "khessian/forms.hpp"
#include "khessian/metric.hpp"
#include "khessian/symfunc.hpp"
#include "oracles.hpp"

using namespace khessian;
using namespace khessian::forms;

namespace {

CMatrix random_hermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(nd(rng), nd(rng));
  return 0.5 * (a + a.adjoint());
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("wedge signs of generators") {
  CHECK(wedge_sign(dz_bit(0), dzbar_bit(0)) == 1);
  CHECK(wedge_sign(dzbar_bit(0), dz_bit(0)) == -1);
  CHECK(wedge_sign(dz_bit(1), dz_bit(1)) == 0);
  // (dz̄¹∧dz²) ∧ dz¹ needs two transpositions to reach dz¹∧dz̄¹∧dz².
  CHECK(wedge_sign(dzbar_bit(0) | dz_bit(1), dz_bit(0)) == 1);
}

TEST_CASE("one-forms anticommute and two-forms commute") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  const int n = 3;
  Form a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a.add(dz_bit(i), Complex(nd(rng), nd(rng)));
    a.add(dzbar_bit(i), Complex(nd(rng), nd(rng)));
    b.add(dz_bit(i), Complex(nd(rng), nd(rng)));
  }
  Form sum = a.wedge(b);
  sum += b.wedge(a);
  CHECK(sum.is_zero());
  CHECK(a.wedge(a).is_zero());
  const Form p = hermitian_two_form(random_hermitian(rng, n));
  const Form q = hermitian_two_form(random_hermitian(rng, n));
  Form diff = p.wedge(q);
  Form neg = q.wedge(p);
  neg *= -1.0;
  diff += neg;
  for (Mask m = 0; m < (Mask{1} << (2 * n)); ++m) CHECK(std::abs(diff.coefficient(m)) < 1e-13);
}

TEST_CASE("top power of the identity form") {
  for (int n = 2; n <= 4; ++n) {
    const Form omega = hermitian_two_form(CMatrix::Identity(n, n));
    // ω^n = n! (√-1)^n dz¹∧dz̄¹∧…∧dzⁿ∧dz̄ⁿ.
    const Complex expected = factorial(n) * std::pow(Complex(0, 1), n);
    CHECK(std::abs(power(omega, n).top() - expected) < 1e-12);
  }
}

TEST_CASE("property: C(n,k) chi^k ^ omega^(n-k) / omega^n equals sigma_k of the relative spectrum") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 3;
    const CMatrix a = 0.4 * random_hermitian(rng, n);
    const CMatrix g = a * a.adjoint() + CMatrix::Identity(n, n);
    const CMatrix chi = random_hermitian(rng, n);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(chi), Eigen::MatrixXcd(g)};
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) lam[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const Form omega = hermitian_two_form(g);
    const Form x = hermitian_two_form(chi);
    const Complex volume = power(omega, n).top();
    for (int k = 0; k <= n; ++k) {
      const Complex mixed = power(x, k).wedge(power(omega, n - k)).top();
      const double lhs = (symfunc::binomial(n, k) * mixed / volume).real();
      const auto ref = oracle::subset_sigma(k, lam);
      CHECK(std::abs(lhs - ref.value) <= 1e-10 * std::max(1.0, ref.magnitude));
      CHECK(std::abs((mixed / volume).imag()) < 1e-12);
    }
  }
}

TEST_CASE("metric forms vanish for flat metrics and dw vanishes for Kahler metrics") {
  const geometry::TorusGrid grid(2, 12);
  const geometry::Spectral sp(grid);
  const auto flat = metric_forms(sp, geometry::MetricField::identity(grid));
  for (std::size_t v = 0; v < grid.size(); v += 11) {
    CHECK(flat.d_omega.at(v).is_zero());
    CHECK(flat.ddbar_omega.at(v).is_zero());
  }
  const auto kahler = metric_forms(sp, geometry::make_metric(sp, geometry::MetricSpec::kahler()));
  double worst = 0.0;
  for (std::size_t v = 0; v < grid.size(); v += 5) {
    const Form d = kahler.d_omega.at(v);
    for (Mask m = 0; m < (Mask{1} << 4); ++m) worst = std::max(worst, std::abs(d.coefficient(m)));
  }
  CHECK(worst < 1e-10);
  const auto torsion = metric_forms(sp, geometry::make_metric(sp, geometry::MetricSpec::torsion()));
  bool nonzero = false;
  for (std::size_t v = 0; v < grid.size() && !nonzero; ++v) nonzero = !torsion.d_omega.at(v).is_zero();
  CHECK(nonzero);
}

TEST_CASE("gradient wedge sides") {
  constexpr double kTwoPi = 2 * std::numbers::pi;
  {
    // In dimension two no torsion term fits the degree budget, so the left
    // side vanishes identically.
    const geometry::TorusGrid grid(2, 12);
    const geometry::Spectral sp(grid);
    const auto gt = geometry::make_metric(sp, geometry::MetricSpec::torsion());
    geometry::ScalarField u(grid);
    for (std::size_t v = 0; v < grid.size(); ++v)
      u[v] = 0.02 * (std::cos(kTwoPi * grid.x(v, 0)) * std::cos(kTwoPi * grid.y(v, 0)) + std::cos(kTwoPi * grid.x(v, 1)));
    const auto sides = gradient_wedge_sides(sp, u, gt, 2);
    CHECK(sides.lhs.sup_abs() == 0.0);
    CHECK(sides.rhs.sup_abs() > 0.0);
    CHECK((sides.rhs - sides.rhs_eigen).sup_abs() <= 1e-12 * sides.rhs.sup_abs());
  }
  const geometry::TorusGrid grid(3, 8);
  const geometry::Spectral sp(grid);
  const auto gt = geometry::make_metric(sp, geometry::MetricSpec::torsion());
  const auto constant = gradient_wedge_sides(sp, geometry::ScalarField(grid, 1.0), gt, 3);
  CHECK(constant.lhs.sup_abs() == 0.0);
  CHECK(constant.rhs.sup_abs() == 0.0);

  geometry::ScalarField u(grid);
  for (std::size_t v = 0; v < grid.size(); ++v)
    u[v] = 0.02 * (std::cos(kTwoPi * grid.x(v, 0)) * std::cos(kTwoPi * grid.y(v, 0)) + std::cos(kTwoPi * grid.x(v, 1)) +
                   std::sin(kTwoPi * grid.y(v, 2)));
  const auto sides = gradient_wedge_sides(sp, u, gt, 3);
  CHECK((sides.rhs - sides.rhs_eigen).sup_abs() <= 1e-12 * std::max(1.0, sides.rhs.sup_abs()));
  CHECK(sides.rhs.inf() >= -1e-14);
  CHECK(sides.lhs.sup_abs() > 0.0);

  const auto gk = geometry::make_metric(sp, geometry::MetricSpec::kahler());
  const auto kahler = gradient_wedge_sides(sp, u, gk, 3);
  CHECK(kahler.lhs.sup_abs() <= 1e-10 * kahler.rhs.sup_abs());
}
