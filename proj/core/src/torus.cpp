#include "khessian/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>

#include "khessian/errors.hpp"

namespace khessian::geometry {

namespace {
// FFTW's planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kPi = std::numbers::pi;
}  // namespace

TorusGrid::TorusGrid(int n, int samples) : n_(n), samples_(samples), size_(1) {
  if (n < 2) throw DomainError("TorusGrid: complex dimension must be >= 2");
  if (n > kMaxDim) throw DomainError("TorusGrid: complex dimension too large");
  if (samples < 8 || samples % 2 != 0)
    throw DomainError("TorusGrid: samples per axis must be even and >= 8, got " +
                      std::to_string(samples));
  strides_.assign(static_cast<std::size_t>(2 * n), 1);
  for (int a = 2 * n - 1; a >= 0; --a) {
    strides_[static_cast<std::size_t>(a)] = size_;
    size_ *= static_cast<std::size_t>(samples);
  }
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const TorusGrid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("ScalarField: size does not match grid");
}

double ScalarField::sup() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::inf() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}
double ScalarField::sup_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}
bool ScalarField::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}
ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}
ScalarField& ScalarField::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

// ---------------------------------------------------------------------------

HermitianField::HermitianField(const TorusGrid& grid, int dim) : grid_(grid), dim_(dim) {
  comps_.assign(static_cast<std::size_t>(dim * (dim + 1) / 2), ComplexVec(grid.size()));
}

CMatrix HermitianField::matrix(std::size_t node) const {
  CMatrix m(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    m(i, i) = Complex(std::real(comps_[slot(i, i)][node]), 0.0);
    for (int j = i + 1; j < dim_; ++j) {
      const Complex v = comps_[slot(i, j)][node];
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  }
  return m;
}

void HermitianField::set(std::size_t node, const CMatrix& m) {
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) comps_[slot(i, j)][node] = m(i, j);
}

// ---------------------------------------------------------------------------

struct Spectral::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Spectral::Spectral(const TorusGrid& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  std::vector<int> dims(static_cast<std::size_t>(grid.axes()), grid.samples());
  ComplexVec scratch_in(grid.size()), scratch_out(grid.size());
  auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
  auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->fwd = fftw_plan_dft(grid.axes(), dims.data(), in, out, FFTW_FORWARD, flags);
  plans_->bwd = fftw_plan_dft(grid.axes(), dims.data(), in, out, FFTW_BACKWARD, flags);
  if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("Spectral: FFTW planning failed");
}

Spectral::~Spectral() {
  std::lock_guard lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

ComplexVec Spectral::forward(std::span<const Complex> f) const {
  if (f.size() != grid_.size()) throw DomainError("Spectral::forward: size mismatch");
  ComplexVec in(f.begin(), f.end());
  ComplexVec out(grid_.size());
  fftw_execute_dft(plans_->fwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

ComplexVec Spectral::forward(std::span<const double> f) const {
  return forward(std::span<const Complex>(to_complex(f)));
}

ComplexVec Spectral::backward(ComplexVec hat) const {
  if (hat.size() != grid_.size()) throw DomainError("Spectral::backward: size mismatch");
  ComplexVec out(grid_.size());
  fftw_execute_dft(plans_->bwd, reinterpret_cast<fftw_complex*>(hat.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (auto& v : out) v *= scale;
  return out;
}

int Spectral::wavenumber(std::size_t node, int axis) const {
  const int a = grid_.index(node, axis);
  const int half = grid_.samples() / 2;
  return a < half ? a : a - grid_.samples();
}

const ComplexVec& Spectral::cached(int kind, int i, int j) const {
  std::lock_guard lock(cache_mutex_);
  auto key = std::make_tuple(kind, i, j);
  if (auto it = cache_.find(key); it != cache_.end()) return *it->second;

  const std::size_t size = grid_.size();
  const int half = grid_.samples() / 2;
  auto first = [&](std::size_t node, int axis) {
    const int k = wavenumber(node, axis);
    return k == -half ? 0.0 : static_cast<double>(k);
  };
  auto sym = std::make_unique<ComplexVec>(size);
  for (std::size_t node = 0; node < size; ++node) {
    Complex v;
    if (kind == 0) {  // ∂/∂z^i = ½(∂x - i∂y) → π(i kx + ky)
      v = kPi * Complex(first(node, 2 * i), 0.0) * Complex(0.0, 1.0) + kPi * first(node, 2 * i + 1);
    } else if (kind == 1) {  // ∂/∂z̄^i = ½(∂x + i∂y) → π(i kx - ky)
      v = kPi * Complex(0.0, first(node, 2 * i)) - kPi * first(node, 2 * i + 1);
    } else if (i == j) {  // ¼(∂x² + ∂y²) with the true Nyquist symbol
      const double kx = wavenumber(node, 2 * i);
      const double ky = wavenumber(node, 2 * i + 1);
      v = -kPi * kPi * (kx * kx + ky * ky);
    } else {
      const Complex a = kPi * Complex(0.0, first(node, 2 * i)) + kPi * first(node, 2 * i + 1);
      const Complex b = kPi * Complex(0.0, first(node, 2 * j)) - kPi * first(node, 2 * j + 1);
      v = a * b;
    }
    (*sym)[node] = v;
  }
  auto& ref = *sym;
  cache_.emplace(key, std::move(sym));
  return ref;
}

const ComplexVec& Spectral::dz_symbol(int i) const { return cached(0, i, 0); }
const ComplexVec& Spectral::dzbar_symbol(int i) const { return cached(1, i, 0); }
const ComplexVec& Spectral::ddbar_symbol(int i, int j) const { return cached(2, i, j); }

ComplexVec Spectral::apply(const ComplexVec& hat, const ComplexVec& symbol) const {
  ComplexVec prod(hat.size());
  for (std::size_t i = 0; i < hat.size(); ++i) prod[i] = hat[i] * symbol[i];
  return backward(std::move(prod));
}

ComplexVec Spectral::dz(std::span<const Complex> f, int i) const {
  return apply(forward(f), dz_symbol(i));
}

ComplexVec Spectral::dzbar(std::span<const Complex> f, int i) const {
  return apply(forward(f), dzbar_symbol(i));
}

ComplexVec to_complex(std::span<const double> f) {
  ComplexVec out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = Complex(f[i], 0.0);
  return out;
}

std::vector<double> real_part(const ComplexVec& f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
  return out;
}

}  // namespace khessian::geometry
