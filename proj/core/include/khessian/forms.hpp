#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "khessian/geometry.hpp"

namespace khessian::forms {

using Mask = std::uint32_t;

/// Generator bits: dz^i is bit 2i, dz̄^i is bit 2i+1.
inline Mask dz_bit(int i) { return Mask{1} << (2 * i); }
inline Mask dzbar_bit(int i) { return Mask{1} << (2 * i + 1); }

/// Sign of e_a ∧ e_b relative to the canonical increasing-order monomial,
/// or 0 if the monomials share a generator.
int wedge_sign(Mask a, Mask b);

/// Pointwise element of the complex exterior algebra over the 2n generators
/// dz^1, dz̄^1, …, dz^n, dz̄^n. Coefficients are stored densely by mask.
class Form {
 public:
  explicit Form(int n);

  int n() const { return n_; }
  Complex coefficient(Mask m) const { return coeff_[m]; }
  void add(Mask m, Complex c) { coeff_[m] += c; }

  Form wedge(const Form& other) const;
  Form& operator+=(const Form& other);
  Form& operator*=(Complex s);

  /// Coefficient of dz^1∧dz̄^1∧…∧dz^n∧dz̄^n.
  Complex top() const { return coeff_.back(); }
  bool is_zero() const;

 private:
  int n_;
  std::vector<Complex> coeff_;
};

/// √-1 Σ m(i,j) dz^i∧dz̄^j
Form hermitian_two_form(const CMatrix& m);
/// Coefficient monomial c · e_{gens[0]} ∧ e_{gens[1]} ∧ … reduced to canonical order.
Form monomial(int n, const std::vector<Mask>& gens, Complex c);
Form power(const Form& f, int p);

/// A form-valued grid function stored as one field per canonical monomial.
struct FormField {
  int n = 0;
  std::map<Mask, geometry::ComplexVec> comps;
  Form at(std::size_t node) const;
};

/// ∂ω, ∂̄ω and ∂∂̄ω of ω = √-1 Σ g_{ij̄} dz^i∧dz̄^j.
struct MetricForms {
  FormField d_omega;
  FormField dbar_omega;
  FormField ddbar_omega;
};

MetricForms metric_forms(const geometry::Spectral& spectral, const geometry::MetricField& g);

/// Torsion part of the lower-order form of rank i: the sum over
/// (p, q) ∈ {0,1}² \ {(0,0)} with 3p + 2q <= n-i-1 of
/// ω^{n-i-1-3p-2q} ∧ (√-1 ∂ω∧∂̄ω)^p ∧ (√-1 ∂∂̄ω)^q.
Form torsion_form(const Form& omega, const Form& d_omega, const Form& dbar_omega, const Form& ddbar_omega,
                  int i);

/// Pointwise sides of the mixed-wedge gradient inequality for 0 <= i <= k-2:
///   lhs = Σ_i |√-1 ∂u∧∂̄u∧ω_u^i∧T_i / ωⁿ|
///   rhs = Σ_i √-1 ∂u∧∂̄u∧ω_u^i∧ω^{n-i-1} / ωⁿ           (form algebra)
///   rhs_eigen = Σ_i i!(n-i-1)!/n! Σ_j σ_i(λ|j)|ũ_j|²    (eigenframe)
struct WedgeSides {
  geometry::ScalarField lhs;
  geometry::ScalarField rhs;
  geometry::ScalarField rhs_eigen;
};

WedgeSides gradient_wedge_sides(const geometry::Spectral& spectral, const geometry::ScalarField& u,
                                const geometry::MetricField& g, int k);

}  // namespace khessian::forms
