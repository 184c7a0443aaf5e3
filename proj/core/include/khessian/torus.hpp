#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "khessian/linalg.hpp"

namespace khessian::geometry {

using ComplexVec = std::vector<Complex>;

/// Unit-period flat torus C^n / (Z + iZ)^n sampled on N points per real
/// coordinate. Real axes are ordered (x₁, y₁, x₂, y₂, …) with z^j = x^j + i y^j;
/// nodes are stored row-major with x₁ slowest.
class TorusGrid {
 public:
  TorusGrid(int n, int samples);

  int n() const { return n_; }
  int samples() const { return samples_; }
  int axes() const { return 2 * n_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

  int index(std::size_t node, int axis) const {
    return static_cast<int>((node / stride(axis)) % static_cast<std::size_t>(samples_));
  }
  double coordinate(std::size_t node, int axis) const {
    return static_cast<double>(index(node, axis)) / samples_;
  }
  /// Real coordinate x^j (0-based j).
  double x(std::size_t node, int j) const { return coordinate(node, 2 * j); }
  /// Real coordinate y^j (0-based j).
  double y(std::size_t node, int j) const { return coordinate(node, 2 * j + 1); }

  bool operator==(const TorusGrid& o) const { return n_ == o.n_ && samples_ == o.samples_; }

 private:
  int n_;
  int samples_;
  std::size_t size_;
  std::vector<std::size_t> strides_;
};

/// Real-valued grid function.
class ScalarField {
 public:
  explicit ScalarField(const TorusGrid& grid, double fill = 0.0);
  ScalarField(const TorusGrid& grid, std::vector<double> values);

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double sup() const;
  double inf() const;
  double mean() const;
  double sup_abs() const;
  bool finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double c);

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Field of n×n Hermitian matrices, stored as the upper-triangle components.
class HermitianField {
 public:
  HermitianField(const TorusGrid& grid, int dim);

  const TorusGrid& grid() const { return grid_; }
  int dim() const { return dim_; }

  /// Component (i, j) with i <= j; the lower triangle is the conjugate.
  ComplexVec& upper(int i, int j) { return comps_[slot(i, j)]; }
  const ComplexVec& upper(int i, int j) const { return comps_[slot(i, j)]; }

  Complex at(std::size_t node, int i, int j) const {
    return i <= j ? comps_[slot(i, j)][node] : std::conj(comps_[slot(j, i)][node]);
  }
  CMatrix matrix(std::size_t node) const;
  void set(std::size_t node, const CMatrix& m);

 private:
  std::size_t slot(int i, int j) const {
    return static_cast<std::size_t>(i * dim_ - i * (i - 1) / 2 + (j - i));
  }

  TorusGrid grid_;
  int dim_;
  std::vector<ComplexVec> comps_;
};

/// Discrete Fourier differentiation on a TorusGrid.
///
/// First derivatives drop the Nyquist mode on each axis so that ∂ and ∂̄ are
/// exact conjugates of one another. The diagonal complex Hessian ∂_i∂_ī uses
/// the true second-derivative symbol, which keeps ∂∂̄ injective on non-constant
/// modes.
class Spectral {
 public:
  explicit Spectral(const TorusGrid& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const TorusGrid& grid() const { return grid_; }

  ComplexVec forward(std::span<const double> f) const;
  ComplexVec forward(std::span<const Complex> f) const;
  /// Inverse transform including the 1/size normalization.
  ComplexVec backward(ComplexVec hat) const;

  /// Symbols of ∂/∂z^i, ∂/∂z̄^i and ∂²/∂z^i∂z̄^j.
  const ComplexVec& dz_symbol(int i) const;
  const ComplexVec& dzbar_symbol(int i) const;
  const ComplexVec& ddbar_symbol(int i, int j) const;

  /// backward(hat ∘ symbol)
  ComplexVec apply(const ComplexVec& hat, const ComplexVec& symbol) const;

  ComplexVec dz(std::span<const Complex> f, int i) const;
  ComplexVec dzbar(std::span<const Complex> f, int i) const;

  /// Integer wavenumber along `axis` for a Fourier node (Nyquist kept as -N/2).
  int wavenumber(std::size_t node, int axis) const;

 private:
  struct Plans;

  const ComplexVec& cached(int kind, int i, int j) const;

  TorusGrid grid_;
  std::unique_ptr<Plans> plans_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::tuple<int, int, int>, std::unique_ptr<ComplexVec>> cache_;
};

ComplexVec to_complex(std::span<const double> f);
std::vector<double> real_part(const ComplexVec& f);

}  // namespace khessian::geometry
