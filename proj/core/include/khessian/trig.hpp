#pragma once

#include <vector>

#include "khessian/torus.hpp"

namespace khessian::geometry {

/// amplitude · cos(2π ⟨frequency, (x₁, y₁, …, x_n, y_n)⟩ + phase)
struct TrigTerm {
  double amplitude = 0.0;
  std::vector<int> frequency;
  double phase = 0.0;
};

/// Sum of trigonometric terms sampled on the grid. Each frequency vector must
/// have length 2n.
ScalarField evaluate_trig(const TorusGrid& grid, const std::vector<TrigTerm>& terms);

}  // namespace khessian::geometry
