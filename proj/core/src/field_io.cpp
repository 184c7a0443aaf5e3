#include "khessian/field_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "khessian/errors.hpp"

namespace khessian::geometry {

static_assert(std::endian::native == std::endian::little, "field dumps assume a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic = {'K', 'H', 'F', 'I', 'E', 'L', 'D', '1'};

struct Header {
  std::uint32_t n, samples, kind, components;
};

void write_header(std::ofstream& os, const Header& h) {
  os.write(kMagic.data(), kMagic.size());
  os.write(reinterpret_cast<const char*>(&h), sizeof(Header));
}

Header read_header(std::ifstream& is, const std::filesystem::path& path) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw DomainError("field file " + path.string() + ": bad magic");
  Header h{};
  is.read(reinterpret_cast<char*>(&h), sizeof(Header));
  if (!is) throw DomainError("field file " + path.string() + ": truncated header");
  return h;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot open field file " + path.string());
  return is;
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  auto os = open_out(path);
  const auto& g = field.grid();
  write_header(os, {static_cast<std::uint32_t>(g.n()), static_cast<std::uint32_t>(g.samples()),
                    static_cast<std::uint32_t>(FieldKind::kScalar), 1});
  os.write(reinterpret_cast<const char*>(field.values().data()),
           static_cast<std::streamsize>(field.size() * sizeof(double)));
}

void write_field(const std::filesystem::path& path, const HermitianField& field) {
  auto os = open_out(path);
  const auto& g = field.grid();
  const int d = field.dim();
  write_header(os, {static_cast<std::uint32_t>(g.n()), static_cast<std::uint32_t>(g.samples()),
                    static_cast<std::uint32_t>(FieldKind::kHermitian), static_cast<std::uint32_t>(d * (d + 1) / 2)});
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const auto& comp = field.upper(i, j);
      os.write(reinterpret_cast<const char*>(comp.data()),
               static_cast<std::streamsize>(comp.size() * sizeof(Complex)));
    }
}

ScalarField read_scalar_field(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is, path);
  if (h.kind != static_cast<std::uint32_t>(FieldKind::kScalar) || h.components != 1)
    throw DomainError("field file " + path.string() + ": not a scalar field");
  TorusGrid grid(static_cast<int>(h.n), static_cast<int>(h.samples));
  std::vector<double> values(grid.size());
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!is) throw DomainError("field file " + path.string() + ": truncated data");
  ScalarField f(grid, std::move(values));
  if (!f.finite()) throw DomainError("field file " + path.string() + ": non-finite values");
  return f;
}

HermitianField read_hermitian_field(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is, path);
  const int d = static_cast<int>(h.n);
  if (h.kind != static_cast<std::uint32_t>(FieldKind::kHermitian) ||
      h.components != static_cast<std::uint32_t>(d * (d + 1) / 2))
    throw DomainError("field file " + path.string() + ": not a Hermitian field");
  TorusGrid grid(d, static_cast<int>(h.samples));
  HermitianField field(grid, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      auto& comp = field.upper(i, j);
      is.read(reinterpret_cast<char*>(comp.data()), static_cast<std::streamsize>(comp.size() * sizeof(Complex)));
    }
  if (!is) throw DomainError("field file " + path.string() + ": truncated data");
  return field;
}

}  // namespace khessian::geometry
