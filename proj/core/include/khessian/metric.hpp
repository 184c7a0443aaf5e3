#pragma once

#include <functional>
#include <string>

#include "khessian/torus.hpp"

namespace khessian::geometry {

enum class MetricPreset { kEuclidean, kKahler, kTorsion };

MetricPreset parse_metric_preset(const std::string& name);
std::string to_string(MetricPreset preset);

/// Preset plus its single strength parameter: the potential amplitude a for
/// `kahler` (g = δ + ∂∂̄φ) and ε for `torsion` (g_{iī} = 1 + ε h_i).
struct MetricSpec {
  MetricPreset preset = MetricPreset::kEuclidean;
  double strength = 0.0;

  static MetricSpec euclidean() { return {MetricPreset::kEuclidean, 0.0}; }
  static MetricSpec kahler(double amplitude = 0.01) { return {MetricPreset::kKahler, amplitude}; }
  static MetricSpec torsion(double epsilon = 0.1) { return {MetricPreset::kTorsion, epsilon}; }
};

/// Periodic Hermitian metric g_{ij̄}(x), positive definite at every node.
class MetricField {
 public:
  /// Throws DomainError if any node is not positive definite.
  explicit MetricField(HermitianField g);

  const TorusGrid& grid() const { return g_.grid(); }
  int dim() const { return g_.dim(); }
  const HermitianField& field() const { return g_; }
  CMatrix at(std::size_t node) const { return g_.matrix(node); }

  /// Smallest eigenvalue of g over the grid (δ_g).
  double min_eigenvalue() const { return min_eig_; }
  /// True if g is the identity at every node.
  bool is_identity() const { return identity_; }

  static MetricField identity(const TorusGrid& grid);

 private:
  HermitianField g_;
  double min_eig_ = 0.0;
  bool identity_ = false;
};

/// Potential of the `kahler` preset: a·(cos 2πx₁ + ½ Σ_j sin 2π(x_j + y_{j+1})).
double kahler_potential(const TorusGrid& grid, std::size_t node, double amplitude);

/// Weight h_i of the `torsion` preset: 3/2 + cos 2πx_{i+1} + ½ sin 2πy_i
/// (indices mod n). It takes values in [0, 3], so the preset satisfies g >= I.
double torsion_weight(const TorusGrid& grid, std::size_t node, int i);

MetricField make_metric(const Spectral& spectral, const MetricSpec& spec);

/// Metric from a pointwise Hermitian-matrix function of the node.
MetricField metric_from_function(const TorusGrid& grid,
                                 const std::function<CMatrix(std::size_t)>& fn);

}  // namespace khessian::geometry
