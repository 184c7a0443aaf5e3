#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "khessian/audit.hpp"
#include "khessian/errors.hpp"
#include "khessian/symfunc.hpp"

using namespace khessian;
using namespace khessian::audit;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_shape(const AuditReport& r) {
  CHECK_FALSE(r.name.empty());
  CHECK_FALSE(r.columns.empty());
  for (const auto& row : r.rows) CHECK(row.size() == r.columns.size());
}

FamilyMember member(double scale, double sup_f, double sup_u, double b, double ddbar, double grad) {
  FamilyMember m;
  m.scale = scale;
  m.converged = true;
  m.sup_f = sup_f;
  m.sup_u = sup_u;
  m.b = b;
  m.max_ddbar = ddbar;
  m.max_gradient_sq = grad;
  return m;
}

}  // namespace

TEST_CASE("csv output has a header and one line per row") {
  AuditReport r;
  r.columns = {"a", "b"};
  r.rows = {{1.0, 2.5}, {3.0, -4.0}};
  std::ostringstream os;
  r.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "a,b");
  int count = 0;
  while (std::getline(is, line)) ++count;
  CHECK(count == 2);
}

TEST_CASE("basic inequality audit passes and is deterministic") {
  const auto a = audit_basic_inequality(4, 2, 2000, 7);
  const auto b = audit_basic_inequality(4, 2, 2000, 7);
  check_shape(a);
  CHECK(a.pass());
  CHECK(a.constants.at("max_ratio") <= 1.0 + 1e-12);
  CHECK(a.rows == b.rows);
  CHECK_THROWS_AS(audit_basic_inequality(3, 4, 10, 0), DomainError);
}

TEST_CASE("restricted-sigma ratio audit on a small sample") {
  const auto r = audit_lemma21(4, 3, 4000, 3);
  check_shape(r);
  CHECK(r.constants.count("sup_i0"));
  CHECK(r.constants.count("sup_i1"));
  // i = 0 is the empty product over σ_0 = 1.
  CHECK(r.constants.at("sup_i0") == doctest::Approx(1.0));
  CHECK(r.constants.at("nonpositive_restricted") == 0.0);
}

TEST_CASE("operator identity audit on a small sample") {
  OperatorIdentityOptions o;
  o.samples = 200;
  o.perturbations = 50;
  const auto r = audit_operator_identities({{2, 2}, {3, 2}}, o, 11);
  check_shape(r);
  CHECK(r.pass());
  CHECK(r.rows.size() == 2);
  CHECK(r.constants.at("max_euler_n2k2") <= 1e-10);
}

TEST_CASE("cherrier audit examples") {
  const geometry::TorusGrid grid(2, 8);
  const geometry::Spectral sp(grid);
  const auto g = geometry::MetricField::identity(grid);
  const std::vector<double> ps = {4, 8, 16};
  const auto flat = audit_cherrier(sp, geometry::ScalarField(grid, 2.0), g, ps);
  check_shape(flat);
  for (const auto& row : flat.rows) CHECK(row[3] == 0.0);

  geometry::ScalarField u(grid);
  for (std::size_t v = 0; v < grid.size(); ++v) u[v] = 0.1 * std::cos(kTwoPi * grid.x(v, 0));
  const auto r = audit_cherrier(sp, u, g, ps);
  CHECK(r.rows.size() == ps.size());
  for (const auto& row : r.rows) {
    CHECK(std::isfinite(row[3]));
    CHECK(row[3] > 0.0);
  }
  CHECK_THROWS_AS(audit_cherrier(sp, u, g, {}), DomainError);
}

TEST_CASE("gradient wedge audit reports zero on Kahler metrics") {
  const geometry::TorusGrid grid(3, 8);
  const geometry::Spectral sp(grid);
  const auto g = geometry::make_metric(sp, geometry::MetricSpec::kahler());
  geometry::ScalarField u(grid);
  for (std::size_t v = 0; v < grid.size(); ++v)
    u[v] = 0.02 * (std::cos(kTwoPi * grid.x(v, 0)) + std::sin(kTwoPi * grid.y(v, 2)));
  const auto r = audit_lemma22(sp, u, g, 3);
  check_shape(r);
  CHECK(r.pass());
  CHECK(r.constants.at("C") == 0.0);
}

TEST_CASE("gradient wedge audit on a torsion metric compares both grids") {
  const geometry::TorusGrid grid(3, 8);
  const geometry::Spectral sp(grid);
  const auto g = geometry::make_metric(sp, geometry::MetricSpec::torsion());
  geometry::ScalarField u(grid);
  for (std::size_t v = 0; v < grid.size(); ++v)
    u[v] = 0.02 * (std::cos(kTwoPi * grid.x(v, 0)) * std::cos(kTwoPi * grid.y(v, 0)) + std::sin(kTwoPi * grid.y(v, 2)));
  const auto r = audit_lemma22(sp, u, g, 3);
  REQUIRE(r.rows.size() == 2);
  const double c_grid = r.rows[0][1], c_shift = r.rows[1][1];
  CHECK(c_grid > 0.0);
  CHECK(c_shift > 0.0);
  CHECK(r.constants.at("C") == std::max(c_grid, c_shift));
  CHECK(r.constants.at("relative_change") ==
        doctest::Approx(std::abs(c_grid - c_shift) / std::max(c_grid, c_shift)));
}

TEST_CASE("commutation audit detects the omitted torsion term") {
  CommutationOptions o;
  o.metrics = {geometry::MetricSpec::euclidean(), geometry::MetricSpec::torsion()};
  o.samples = {12, 24};
  const auto r = audit_commutation(o);
  check_shape(r);
  CHECK(r.pass());
  bool detected = false;
  for (const auto& note : r.notes) detected = detected || note.find("mutation detected") != std::string::npos;
  CHECK(detected);
  o.samples = {12};
  CHECK_THROWS_AS(audit_commutation(o), DomainError);
}

TEST_CASE("family audits accept uniform ratios and flag outliers") {
  std::vector<FamilyMember> fam;
  for (int s = 1; s <= 5; ++s) fam.push_back(member(0.2 * s, 0.2 * s, 0.05 * s, -0.1 * s, 1.0, 0.5));
  CHECK(audit_c0(fam).pass());
  CHECK(audit_c2(fam).pass());
  const auto b = audit_b_bound(fam, 2, 2, true);
  check_shape(b);
  CHECK(b.pass());
  CHECK(b.constants.at("log_binomial") == doctest::Approx(0.0));

  auto bad = fam;
  bad[4].sup_u = 100.0;
  bad[4].max_ddbar = 1e4;
  bad[4].b = 5.0;
  CHECK_FALSE(audit_c0(bad).pass());
  CHECK_FALSE(audit_c2(bad).pass());
  CHECK_FALSE(audit_b_bound(bad, 2, 2, true).pass());
  CHECK(audit_b_bound(bad, 2, 2, false).pass());

  auto failed = fam;
  failed[0].converged = false;
  CHECK_FALSE(audit_c0(failed).pass());
}

TEST_CASE("solve_family converges on a small euclidean family") {
  solver::SolveConfig c;
  c.samples = 8;
  c.f_terms = {{0.3, {1, 0, 0, 0}, 0.0}};
  const auto fam = solve_family(c, {0.5, 1.0});
  REQUIRE(fam.size() == 2);
  for (const auto& m : fam) {
    CHECK(m.converged);
    CHECK(std::abs(m.b) <= m.sup_f + 1e-6);
  }
  CHECK(fam[1].sup_f == doctest::Approx(2.0 * fam[0].sup_f));
}
