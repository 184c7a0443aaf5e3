#pragma once

#include <cstdint>
#include <filesystem>

#include "khessian/torus.hpp"

namespace khessian::geometry {

/// Binary field dump layout (little-endian):
///   8 bytes   magic "KHFIELD1"
///   uint32    n (complex dimension)
///   uint32    N (samples per real axis)
///   uint32    kind (0 = scalar, 1 = Hermitian)
///   uint32    components (1 for scalar, n(n+1)/2 for Hermitian)
///   float64[] values, component-major, nodes in row-major order;
///             Hermitian components are (re, im) pairs in upper-triangle order.
enum class FieldKind : std::uint32_t { kScalar = 0, kHermitian = 1 };

void write_field(const std::filesystem::path& path, const ScalarField& field);
void write_field(const std::filesystem::path& path, const HermitianField& field);

ScalarField read_scalar_field(const std::filesystem::path& path);
HermitianField read_hermitian_field(const std::filesystem::path& path);

}  // namespace khessian::geometry
