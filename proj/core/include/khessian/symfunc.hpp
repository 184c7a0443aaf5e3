#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace khessian::symfunc {

/// Eigenvalue vector kept in descending order, n >= 2.
class Spectrum {
 public:
  /// Sorts `values` descending. Throws DomainError if fewer than two entries
  /// or any entry is non-finite.
  explicit Spectrum(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  double max() const { return values_.front(); }
  double min() const { return values_.back(); }

 private:
  std::vector<double> values_;
};

/// Cone index k with 1 <= k <= n. The upper bound is checked against a
/// spectrum at the point of use.
class ConeLevel {
 public:
  explicit ConeLevel(int k);
  int value() const { return k_; }

 private:
  int k_;
};

/// Binomial coefficient C(n, k) as a double (0 when k is out of range).
double binomial(int n, int k);

/// All σ_0..σ_kmax of `values` via the coefficients of Π(1 + λ_i t).
std::vector<double> elementary_all(std::span<const double> values, int kmax);

/// σ_k of a raw vector; σ_0 = 1. Throws DomainError for k < 0 or k > size.
double sigma(int k, std::span<const double> values);
double sigma(int k, const Spectrum& lambda);

/// σ_r of λ with the entries at `excluded` (0-based) set to zero.
double sigma_restricted(int r, const Spectrum& lambda,
                        std::span<const std::size_t> excluded);
double sigma_restricted(int r, std::span<const double> values,
                        std::span<const std::size_t> excluded);

/// Strict membership: σ_j(λ) > 0 for j = 1..k.
bool in_gamma_k(std::span<const double> values, int k);
bool in_gamma_k(const Spectrum& lambda, ConeLevel k);

/// Deterministic Γ_k sampler: uniform box [-scale, scale]^n with rejection,
/// falling back to a perturbed positive-orthant construction once the
/// observed rejection rate exceeds 99%.
class ConeSampler {
 public:
  ConeSampler(int n, ConeLevel k, double scale, std::uint64_t seed);

  Spectrum next();

  /// A cone point whose smallest σ_j (j <= k) is about `margin` times the
  /// scale of σ_j at the starting point, found by sliding along -(1,...,1)
  /// towards the cone boundary.
  Spectrum next_near_boundary(double margin);

  std::uint64_t attempts() const { return attempts_; }
  std::uint64_t accepted() const { return accepted_; }
  bool fallback_active() const { return fallback_; }

 private:
  Spectrum constructive();

  int n_;
  int k_;
  double scale_;
  std::mt19937_64 rng_;
  std::uint64_t attempts_ = 0;
  std::uint64_t accepted_ = 0;
  bool fallback_ = false;
};

/// One-shot sampler call.
Spectrum sample_gamma_k(int n, ConeLevel k, double scale, std::uint64_t seed);

/// |λ_p| <= (n-k) λ_k for all k+1 <= p <= n (1-based, descending).
/// Requires k < n and λ in Γ_k; throws DomainError otherwise.
bool basic_inequality_check(const Spectrum& lambda, ConeLevel k);

/// Outcome of one product-over-restricted-sigma ratio evaluation.
struct Lemma21Ratio {
  double ratio = 0.0;        // |λ_{j1}...λ_{ji}| / σ_i(λ|j)
  double restricted = 0.0;   // σ_i(λ|j)
  bool violation = false;    // σ_i(λ|j) <= 0
};

/// Ratio of a product of i entries (indices in `subset`, all != j) to
/// σ_i(λ|j). Indices are 0-based into the descending spectrum. Requires
/// λ in Γ_k, 3 <= k <= n and 0 <= i <= k-2.
Lemma21Ratio lemma21_ratio(const Spectrum& lambda, ConeLevel k, std::size_t j,
                           std::span<const std::size_t> subset);

}  // namespace khessian::symfunc
