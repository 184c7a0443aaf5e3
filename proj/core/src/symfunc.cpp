#include "khessian/symfunc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "khessian/errors.hpp"

namespace khessian::symfunc {

Spectrum::Spectrum(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw DomainError("Spectrum: need n >= 2 entries");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("Spectrum: non-finite entry");
  std::sort(values_.begin(), values_.end(), std::greater<>());
}

ConeLevel::ConeLevel(int k) : k_(k) {
  if (k < 1) throw DomainError("ConeLevel: k must be >= 1, got " + std::to_string(k));
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

std::vector<double> elementary_all(std::span<const double> values, int kmax) {
  const int n = static_cast<int>(values.size());
  kmax = std::min(kmax, n);
  std::vector<double> e(static_cast<std::size_t>(kmax) + 1, 0.0);
  e[0] = 1.0;
  int seen = 0;
  for (double x : values) {
    ++seen;
    for (int j = std::min(seen, kmax); j >= 1; --j) e[j] += x * e[j - 1];
  }
  return e;
}

double sigma(int k, std::span<const double> values) {
  if (k < 0 || k > static_cast<int>(values.size()))
    throw DomainError("sigma: k=" + std::to_string(k) + " outside [0, " +
                      std::to_string(values.size()) + "]");
  if (k == 0) return 1.0;
  return elementary_all(values, k)[k];
}

double sigma(int k, const Spectrum& lambda) { return sigma(k, lambda.values()); }

double sigma_restricted(int r, std::span<const double> values,
                        std::span<const std::size_t> excluded) {
  std::vector<double> masked(values.begin(), values.end());
  for (std::size_t idx : excluded) {
    if (idx >= masked.size())
      throw DomainError("sigma_restricted: index " + std::to_string(idx) + " out of range");
    masked[idx] = 0.0;
  }
  return sigma(r, masked);
}

double sigma_restricted(int r, const Spectrum& lambda,
                        std::span<const std::size_t> excluded) {
  return sigma_restricted(r, lambda.values(), excluded);
}

bool in_gamma_k(std::span<const double> values, int k) {
  if (k < 1 || k > static_cast<int>(values.size()))
    throw DomainError("in_gamma_k: k out of range");
  const auto e = elementary_all(values, k);
  for (int j = 1; j <= k; ++j)
    if (!(e[j] > 0.0)) return false;
  return true;
}

bool in_gamma_k(const Spectrum& lambda, ConeLevel k) {
  return in_gamma_k(lambda.values(), k.value());
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::uint64_t kMinAttemptsForRate = 100;
constexpr std::uint64_t kPerCallBudget = 20000;
constexpr int kFallbackHalvings = 64;
}  // namespace

ConeSampler::ConeSampler(int n, ConeLevel k, double scale, std::uint64_t seed)
    : n_(n), k_(k.value()), scale_(scale), rng_(seed) {
  if (n < 2) throw DomainError("ConeSampler: n must be >= 2");
  if (k_ > n) throw DomainError("ConeSampler: k must be <= n");
  if (!(scale > 0.0)) throw DomainError("ConeSampler: scale must be positive");
}

Spectrum ConeSampler::constructive() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> base(static_cast<std::size_t>(n_));
  for (double& v : base) v = scale_ * (1.0 - unit(rng_));  // (0, scale]
  std::sort(base.begin(), base.end(), std::greater<>());
  std::vector<double> bump(static_cast<std::size_t>(n_ - k_));
  for (double& v : bump) v = scale_ * unit(rng_);

  double delta = 1.0;
  for (int h = 0; h < kFallbackHalvings; ++h, delta *= 0.5) {
    std::vector<double> trial = base;
    for (int p = 0; p < n_ - k_; ++p) trial[k_ + p] = -delta * bump[p];
    if (in_gamma_k(trial, k_)) {
      ++accepted_;
      return Spectrum(std::move(trial));
    }
  }
  throw IterationError("ConeSampler: constructive fallback exhausted its budget");
}

Spectrum ConeSampler::next() {
  if (fallback_) return constructive();
  std::uniform_real_distribution<double> box(-scale_, scale_);
  std::vector<double> trial(static_cast<std::size_t>(n_));
  for (std::uint64_t local = 0; local < kPerCallBudget; ++local) {
    for (double& v : trial) v = box(rng_);
    ++attempts_;
    if (in_gamma_k(trial, k_)) {
      ++accepted_;
      return Spectrum(trial);
    }
    if (attempts_ >= kMinAttemptsForRate &&
        static_cast<double>(accepted_) < 0.01 * static_cast<double>(attempts_)) {
      fallback_ = true;
      return constructive();
    }
  }
  throw IterationError("ConeSampler: rejection budget exhausted (scale/k mismatch?)");
}

Spectrum ConeSampler::next_near_boundary(double margin) {
  const Spectrum start = next();
  std::vector<double> base(start.values().begin(), start.values().end());
  auto shifted = [&](double t) {
    std::vector<double> v = base;
    for (double& x : v) x -= t;
    return v;
  };
  // Normalized distance to the boundary: min_j σ_j / (C(n,j) max|λ|^j).
  auto closeness = [&](const std::vector<double>& v) {
    double amax = 0.0;
    for (double x : v) amax = std::max(amax, std::abs(x));
    const auto e = elementary_all(v, k_);
    double m = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= k_; ++j)
      m = std::min(m, e[j] / (binomial(n_, j) * std::pow(amax, j)));
    return m;
  };

  double inside = 0.0;
  double outside = start.max() + scale_;  // every entry negative here
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (inside + outside);
    auto v = shifted(mid);
    if (in_gamma_k(v, k_)) {
      inside = mid;
      if (closeness(v) <= margin) break;
    } else {
      outside = mid;
    }
  }
  return Spectrum(shifted(inside));
}

Spectrum sample_gamma_k(int n, ConeLevel k, double scale, std::uint64_t seed) {
  ConeSampler sampler(n, k, scale, seed);
  return sampler.next();
}

bool basic_inequality_check(const Spectrum& lambda, ConeLevel k) {
  const int n = static_cast<int>(lambda.size());
  const int kv = k.value();
  if (kv >= n) throw DomainError("basic_inequality_check: requires k < n");
  if (!in_gamma_k(lambda, k)) throw DomainError("basic_inequality_check: spectrum outside Gamma_k");
  const double bound = (n - kv) * lambda[static_cast<std::size_t>(kv - 1)];
  for (int p = kv; p < n; ++p)
    if (std::abs(lambda[static_cast<std::size_t>(p)]) > bound) return false;
  return true;
}

Lemma21Ratio lemma21_ratio(const Spectrum& lambda, ConeLevel k, std::size_t j,
                           std::span<const std::size_t> subset) {
  const int n = static_cast<int>(lambda.size());
  const int kv = k.value();
  const int i = static_cast<int>(subset.size());
  if (kv < 3 || kv > n) throw DomainError("lemma21_ratio: requires 3 <= k <= n");
  if (i > kv - 2) throw DomainError("lemma21_ratio: requires i <= k-2");
  if (j >= lambda.size()) throw DomainError("lemma21_ratio: j out of range");
  for (std::size_t a = 0; a < subset.size(); ++a) {
    if (subset[a] >= lambda.size() || subset[a] == j)
      throw DomainError("lemma21_ratio: subset index invalid or equal to j");
    for (std::size_t b = a + 1; b < subset.size(); ++b)
      if (subset[a] == subset[b]) throw DomainError("lemma21_ratio: repeated subset index");
  }
  if (!in_gamma_k(lambda, k)) throw DomainError("lemma21_ratio: spectrum outside Gamma_k");

  Lemma21Ratio out;
  const std::size_t excl[] = {j};
  out.restricted = sigma_restricted(i, lambda, excl);
  double prod = 1.0;
  for (std::size_t idx : subset) prod *= lambda[idx];
  if (!(out.restricted > 0.0)) {
    out.violation = true;
    out.ratio = std::numeric_limits<double>::infinity();
    return out;
  }
  out.ratio = std::abs(prod) / out.restricted;
  return out;
}

}  // namespace khessian::symfunc
