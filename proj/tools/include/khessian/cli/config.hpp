#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "khessian/metric.hpp"
#include "khessian/solver.hpp"
#include "khessian/trig.hpp"

namespace khessian::cli {

/// Invalid configuration. The message names the offending key and, when the
/// key came from the file, its line and column.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command {
  kSolve,
  kMms,
  kSampleCone,
  kAuditBasicInequality,
  kAuditLemma21,
  kAuditLemma22,
  kAuditCherrier,
  kAuditC0,
  kAuditC2,
  kAuditBBound,
  kAuditCommutation,
  kAuditOperatorIdentities,
};

/// Parses "solve", "mms", "sample-cone" or "audit" plus an audit name.
Command parse_command(const std::string& command, const std::string& audit_name = {});
std::string to_string(Command command);
std::vector<std::string> audit_names();

struct ProblemBlock {
  int n = 2;
  int k = 2;
  int samples = 16;
  geometry::MetricSpec metric;
  std::vector<geometry::TrigTerm> f_terms;
  std::optional<std::string> f_file;
  /// Manufactured solution u* = amplitude · Σ terms (the default shape is
  /// cos 2πx₁ cos 2πy₁ + cos 2πx₂).
  double u_star_amplitude = 0.05;
  std::vector<geometry::TrigTerm> u_star_terms;
};

enum class SolutionSource { kManufactured, kSolve };

struct AuditBlock {
  /// Unset means the per-command default (10⁵ for the inequality audits,
  /// 10⁴ for operator identities).
  std::optional<std::size_t> samples;
  std::vector<std::pair<int, int>> cases;  // empty: per-command default
  std::size_t perturbations = 1000;
  double fd_step = 1e-5;
  double fd_margin = 1e-2;
  double euler_tolerance = 1e-10;
  double gradient_tolerance = 1e-6;
  double concavity_tolerance = 1e-10;
  double stability = 0.2;
  SolutionSource solution = SolutionSource::kManufactured;
  double mms_error_tolerance = 1e-6;
  double mms_b_tolerance = 1e-8;
  std::vector<double> exponents = {4, 8, 12, 16, 20, 24, 28, 32, 36, 40, 44, 48, 52, 56, 60, 64};
  double cherrier_factor = 3.0;
  std::vector<double> scales = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double spread = 10.0;
  double slack = 1e-6;
  std::vector<geometry::MetricSpec> metrics = {geometry::MetricSpec::torsion()};
  std::vector<int> grids = {12, 24};
  std::vector<int> orders = {3, 4};
  double ratio_per_doubling = 10.0;
  double floor_order3 = 1e-10;
  double floor_order4 = 1e-9;
  bool mutation_control = true;
  std::size_t count = 10;
  double scale = 1.0;
};

struct OutputBlock {
  std::optional<std::string> directory;
  bool dump_fields = false;
};

struct RunConfig {
  ProblemBlock problem;
  solver::SolverOptions solver;
  AuditBlock audit;
  OutputBlock output;
  std::uint64_t seed = 0;
  /// The configuration tree after overrides, as embedded in report.json.
  YAML::Node effective;

  solver::SolveConfig solve_config() const;
};

/// Applies `key.path=value` overrides to a parsed tree. Values are read as
/// YAML, so lists and maps may be given in flow style.
void apply_override(YAML::Node& root, const std::string& assignment);

/// True for commands that build a grid, metric and source.
bool uses_field_problem(Command command);

/// Loads the file, applies overrides and the optional seed, and converts the
/// result. The solve settings are validated when `command` needs them.
/// Throws ConfigError on any problem.
RunConfig load_config(const std::filesystem::path& path, Command command, const std::vector<std::string>& overrides,
                      std::optional<std::uint64_t> seed = std::nullopt);
RunConfig parse_config(const YAML::Node& root, Command command, const std::string& source_name = "<config>");

}  // namespace khessian::cli
