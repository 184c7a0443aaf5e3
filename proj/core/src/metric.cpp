#include "khessian/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "khessian/errors.hpp"
#include "khessian/geometry.hpp"

namespace khessian::geometry {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

MetricPreset parse_metric_preset(const std::string& name) {
  if (name == "euclidean") return MetricPreset::kEuclidean;
  if (name == "kahler") return MetricPreset::kKahler;
  if (name == "torsion") return MetricPreset::kTorsion;
  throw DomainError("unknown metric preset '" + name + "' (expected euclidean, kahler or torsion)");
}

std::string to_string(MetricPreset preset) {
  switch (preset) {
    case MetricPreset::kEuclidean: return "euclidean";
    case MetricPreset::kKahler: return "kahler";
    case MetricPreset::kTorsion: return "torsion";
  }
  return "unknown";
}

MetricField::MetricField(HermitianField g) : g_(std::move(g)) {
  const int n = g_.dim();
  if (n != g_.grid().n()) throw DomainError("MetricField: matrix size must equal the complex dimension");
  min_eig_ = std::numeric_limits<double>::infinity();
  identity_ = true;
  const CMatrix eye = CMatrix::Identity(n, n);
  for (std::size_t node = 0; node < g_.grid().size(); ++node) {
    const CMatrix m = g_.matrix(node);
    if (!m.allFinite()) throw DomainError("MetricField: non-finite entry");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (!(lo > 0.0))
      throw DomainError("MetricField: not positive definite at node " + std::to_string(node));
    min_eig_ = std::min(min_eig_, lo);
    if (identity_ && (m - eye).cwiseAbs().maxCoeff() != 0.0) identity_ = false;
  }
}

MetricField MetricField::identity(const TorusGrid& grid) {
  HermitianField g(grid, grid.n());
  for (int i = 0; i < grid.n(); ++i) std::fill(g.upper(i, i).begin(), g.upper(i, i).end(), Complex(1.0, 0.0));
  return MetricField(std::move(g));
}

double kahler_potential(const TorusGrid& grid, std::size_t node, double amplitude) {
  const int n = grid.n();
  double v = std::cos(kTwoPi * grid.x(node, 0));
  for (int j = 0; j < n; ++j) v += 0.5 * std::sin(kTwoPi * (grid.x(node, j) + grid.y(node, (j + 1) % n)));
  return amplitude * v;
}

double torsion_weight(const TorusGrid& grid, std::size_t node, int i) {
  const int n = grid.n();
  return 1.5 + std::cos(kTwoPi * grid.x(node, (i + 1) % n)) + 0.5 * std::sin(kTwoPi * grid.y(node, i));
}

MetricField make_metric(const Spectral& spectral, const MetricSpec& spec) {
  const TorusGrid& grid = spectral.grid();
  const int n = grid.n();
  switch (spec.preset) {
    case MetricPreset::kEuclidean:
      return MetricField::identity(grid);
    case MetricPreset::kKahler: {
      ScalarField phi(grid);
      for (std::size_t node = 0; node < grid.size(); ++node) phi[node] = kahler_potential(grid, node, spec.strength);
      HermitianField g = complex_hessian(spectral, phi);
      for (int i = 0; i < n; ++i)
        for (auto& v : g.upper(i, i)) v += 1.0;
      return MetricField(std::move(g));
    }
    case MetricPreset::kTorsion: {
      if (!(spec.strength >= 0.0 && spec.strength <= 0.2))
        throw DomainError("torsion preset: epsilon must lie in [0, 0.2]");
      HermitianField g(grid, n);
      for (int i = 0; i < n; ++i) {
        auto& comp = g.upper(i, i);
        for (std::size_t node = 0; node < grid.size(); ++node)
          comp[node] = 1.0 + spec.strength * torsion_weight(grid, node, i);
      }
      return MetricField(std::move(g));
    }
  }
  throw DomainError("make_metric: unhandled preset");
}

MetricField metric_from_function(const TorusGrid& grid, const std::function<CMatrix(std::size_t)>& fn) {
  HermitianField g(grid, grid.n());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const CMatrix m = fn(node);
    if (m.rows() != grid.n() || m.cols() != grid.n())
      throw DomainError("metric_from_function: wrong matrix size");
    if (hermiticity_residual(m) > 1e-12) throw DomainError("metric_from_function: matrix is not Hermitian");
    g.set(node, m);
  }
  return MetricField(std::move(g));
}

}  // namespace khessian::geometry
