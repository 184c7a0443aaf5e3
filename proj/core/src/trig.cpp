#include "khessian/trig.hpp"

#include <cmath>
#include <numbers>

#include "khessian/errors.hpp"

namespace khessian::geometry {

ScalarField evaluate_trig(const TorusGrid& grid, const std::vector<TrigTerm>& terms) {
  ScalarField out(grid);
  for (const auto& term : terms) {
    if (static_cast<int>(term.frequency.size()) != grid.axes())
      throw DomainError("trig term: frequency vector must have length 2n = " + std::to_string(grid.axes()));
    if (!std::isfinite(term.amplitude) || !std::isfinite(term.phase))
      throw DomainError("trig term: non-finite amplitude or phase");
    for (std::size_t node = 0; node < grid.size(); ++node) {
      // Integer arithmetic on the phase keeps grid samples exact.
      long long cycles = 0;
      for (int a = 0; a < grid.axes(); ++a)
        cycles += static_cast<long long>(term.frequency[static_cast<std::size_t>(a)]) * grid.index(node, a);
      const long long reduced = ((cycles % grid.samples()) + grid.samples()) % grid.samples();
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(reduced) / grid.samples();
      out[node] += term.amplitude * std::cos(angle + term.phase);
    }
  }
  return out;
}

}  // namespace khessian::geometry
