#include "khessian/cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "khessian/audit.hpp"
#include "khessian/errors.hpp"
#include "khessian/field_io.hpp"
#include "khessian/symfunc.hpp"

namespace khessian::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Everything a command hands back for the report.
struct Outcome {
  bool pass = false;
  json result = json::object();
  audit::AuditReport table;  // rows.csv
  std::vector<std::string> fields;
  double solver_seconds = 0.0;
};

json audit_json(const audit::AuditReport& r) {
  return {{"audit", r.name},          {"description", r.description}, {"pass", r.pass()},
          {"columns", r.columns},      {"row_count", r.rows.size()},   {"constants", r.constants},
          {"tolerances", r.tolerances}, {"violations", r.violations},   {"notes", r.notes}};
}

// Joins per-(n,k) reports into one table; constants keep their case label.
audit::AuditReport merge(std::vector<audit::AuditReport> parts) {
  audit::AuditReport out;
  if (parts.empty()) return out;
  out.name = parts.front().name;
  out.columns = parts.front().columns;
  out.tolerances = parts.front().tolerances;
  for (auto& p : parts) {
    out.description += (out.description.empty() ? "" : "; ") + p.description;
    out.rows.insert(out.rows.end(), p.rows.begin(), p.rows.end());
    const std::string label = p.rows.empty() ? std::string()
                                             : "n" + std::to_string(int(p.rows.front()[0])) + "k" +
                                                   std::to_string(int(p.rows.front()[1])) + "_";
    for (const auto& [key, value] : p.constants)
      out.constants[label + key] = value;
    out.violations.insert(out.violations.end(), p.violations.begin(), p.violations.end());
    for (auto& note : p.notes)
      if (std::find(out.notes.begin(), out.notes.end(), note) == out.notes.end()) out.notes.push_back(note);
  }
  return out;
}

json solve_json(const solver::SolveReport& rep) {
  return {{"converged", rep.converged},
          {"message", rep.message},
          {"b", rep.b},
          {"sup_abs_u", rep.u.sup_abs()},
          {"sup_u", rep.u.sup()},
          {"inf_u", rep.u.inf()},
          {"last_good_t", rep.last_good_t},
          {"newton_iterations", rep.newton_iterations},
          {"linear_iterations", rep.linear_iterations},
          {"continuation_steps", rep.continuation_steps},
          {"final_residual", rep.final_residual},
          {"lambda_min", rep.lambda_min},
          {"lambda_max", rep.lambda_max},
          {"max_ddbar_norm", rep.max_ddbar_norm},
          {"max_gradient_sq", rep.max_gradient_sq}};
}

audit::AuditReport history_table(const solver::SolveReport& rep) {
  audit::AuditReport t;
  t.columns = {"iteration", "residual"};
  for (std::size_t i = 0; i < rep.residual_history.size(); ++i) t.rows.push_back({double(i), rep.residual_history[i]});
  return t;
}

// Grid, metric and solver for the configured field problem.
struct FieldProblem {
  explicit FieldProblem(const RunConfig& cfg)
      : grid(cfg.problem.n, cfg.problem.samples),
        spectral(grid),
        g(geometry::make_metric(spectral, cfg.problem.metric)),
        newton(spectral, g, cfg.problem.k, cfg.solver) {}

  geometry::TorusGrid grid;
  geometry::Spectral spectral;
  geometry::MetricField g;
  solver::Solver newton;
};

geometry::ScalarField manufactured_u(const RunConfig& cfg, const geometry::TorusGrid& grid) {
  return cfg.problem.u_star_amplitude * geometry::evaluate_trig(grid, cfg.problem.u_star_terms);
}

struct Solution {
  solver::SolveReport report;
  geometry::ScalarField f;
  std::optional<double> mms_error;
};

Solution solve_problem(const RunConfig& cfg, const FieldProblem& fp, bool manufactured) {
  if (manufactured) {
    const auto u_star = manufactured_u(cfg, fp.grid);
    auto f = solver::manufactured_source(fp.spectral, fp.g, u_star, cfg.problem.k);
    auto rep = fp.newton.solve(f);
    auto shifted = u_star;
    shifted += -u_star.sup();
    const double err = (rep.u - shifted).sup_abs();
    return {std::move(rep), std::move(f), err};
  }
  auto f = solver::build_source(cfg.solve_config(), fp.grid);
  auto rep = fp.newton.solve(f);
  return {std::move(rep), std::move(f), std::nullopt};
}

void dump_fields(const RunConfig& cfg, const fs::path& dir, const FieldProblem& fp, const Solution& s,
                 Outcome& out) {
  if (!cfg.output.dump_fields) return;
  geometry::write_field(dir / "u.khf", s.report.u);
  geometry::write_field(dir / "f.khf", s.f);
  geometry::write_field(dir / "metric.khf", fp.g.field());
  out.fields = {"u.khf", "f.khf", "metric.khf"};
}

Outcome run_solve(const RunConfig& cfg, const fs::path& dir, bool manufactured) {
  const FieldProblem fp(cfg);
  const Solution s = solve_problem(cfg, fp, manufactured);
  Outcome out;
  out.result = solve_json(s.report);
  out.table = history_table(s.report);
  out.solver_seconds = s.report.wall_seconds;
  out.pass = s.report.converged;
  if (manufactured) {
    const bool ok_u = *s.mms_error <= cfg.audit.mms_error_tolerance;
    const bool ok_b = std::abs(s.report.b) <= cfg.audit.mms_b_tolerance;
    out.result["mms"] = {{"error_sup", *s.mms_error},
                         {"error_tolerance", cfg.audit.mms_error_tolerance},
                         {"b_tolerance", cfg.audit.mms_b_tolerance},
                         {"error_within_tolerance", ok_u},
                         {"b_within_tolerance", ok_b}};
    out.pass = out.pass && ok_u && ok_b;
  }
  dump_fields(cfg, dir, fp, s, out);
  return out;
}

Outcome run_sample_cone(const RunConfig& cfg) {
  const int n = cfg.problem.n, k = cfg.problem.k;
  if (cfg.audit.count < 1) throw ConfigError("audit.count must be >= 1");
  symfunc::ConeSampler sampler(n, symfunc::ConeLevel(k), cfg.audit.scale, cfg.seed);
  Outcome out;
  audit::AuditReport& t = out.table;
  t.name = "sample-cone";
  for (int i = 1; i <= n; ++i) t.columns.push_back("lambda_" + std::to_string(i));
  std::size_t rejected = 0;
  for (std::size_t row = 0; row < cfg.audit.count; ++row) {
    const auto lambda = sampler.next();
    if (!symfunc::in_gamma_k(lambda.values(), k)) ++rejected;
    t.rows.emplace_back(lambda.values().begin(), lambda.values().end());
  }
  out.pass = rejected == 0;
  out.result = {{"n", n},
                {"k", k},
                {"count", cfg.audit.count},
                {"rows_outside_cone", rejected},
                {"attempts", sampler.attempts()},
                {"fallback_active", sampler.fallback_active()}};
  return out;
}

Outcome from_audit(audit::AuditReport r) {
  Outcome out;
  out.pass = r.pass();
  out.result = audit_json(r);
  out.table = std::move(r);
  return out;
}

std::vector<std::pair<int, int>> cases_or(const RunConfig& cfg, std::vector<std::pair<int, int>> fallback) {
  return cfg.audit.cases.empty() ? fallback : cfg.audit.cases;
}

Outcome run_audit(Command command, const RunConfig& cfg, const fs::path& dir) {
  const auto& a = cfg.audit;
  switch (command) {
    case Command::kAuditBasicInequality: {
      std::vector<audit::AuditReport> parts;
      for (auto [n, k] : cases_or(cfg, {{3, 2}, {4, 2}, {4, 3}, {5, 3}}))
        parts.push_back(audit::audit_basic_inequality(n, k, a.samples.value_or(100000), cfg.seed));
      return from_audit(merge(std::move(parts)));
    }
    case Command::kAuditLemma21: {
      std::vector<audit::AuditReport> parts;
      for (auto [n, k] : cases_or(cfg, {{3, 3}, {4, 3}, {4, 4}, {5, 3}, {5, 4}, {5, 5}, {6, 3}, {6, 4}, {6, 6}}))
        parts.push_back(audit::audit_lemma21(n, k, a.samples.value_or(100000), cfg.seed, a.stability));
      return from_audit(merge(std::move(parts)));
    }
    case Command::kAuditOperatorIdentities: {
      audit::OperatorIdentityOptions o;
      o.samples = a.samples.value_or(10000);
      o.perturbations = a.perturbations;
      o.fd_step = a.fd_step;
      o.fd_margin = a.fd_margin;
      o.euler_tolerance = a.euler_tolerance;
      o.gradient_tolerance = a.gradient_tolerance;
      o.concavity_tolerance = a.concavity_tolerance;
      return from_audit(audit::audit_operator_identities(
          cases_or(cfg, {{2, 1}, {2, 2}, {3, 2}, {3, 3}, {4, 2}, {4, 3}, {5, 3}}), o, cfg.seed));
    }
    case Command::kAuditCommutation: {
      audit::CommutationOptions o;
      o.n = cfg.problem.n;
      o.metrics = a.metrics;
      o.samples = a.grids;
      o.orders = a.orders;
      o.ratio_per_doubling = a.ratio_per_doubling;
      o.floor_order3 = a.floor_order3;
      o.floor_order4 = a.floor_order4;
      o.mutation_control = a.mutation_control;
      return from_audit(audit::audit_commutation(o));
    }
    case Command::kAuditLemma22:
    case Command::kAuditCherrier: {
      const FieldProblem fp(cfg);
      const Solution s = solve_problem(cfg, fp, a.solution == SolutionSource::kManufactured);
      Outcome out;
      if (!s.report.converged) {
        out.result = {{"solve", solve_json(s.report)}};
        out.result["error"] = "solver failed: " + s.report.message;
        return out;
      }
      const double sup_u = s.report.u.sup();
      auto u = s.report.u;
      u += -sup_u;
      out = from_audit(command == Command::kAuditLemma22
                           ? audit::audit_lemma22(fp.spectral, u, fp.g, cfg.problem.k, a.stability)
                           : audit::audit_cherrier(fp.spectral, u, fp.g, a.exponents, a.cherrier_factor));
      out.result["solve"] = solve_json(s.report);
      if (s.mms_error) out.result["solve"]["mms_error_sup"] = *s.mms_error;
      out.solver_seconds = s.report.wall_seconds;
      dump_fields(cfg, dir, fp, s, out);
      return out;
    }
    case Command::kAuditC0:
    case Command::kAuditC2:
    case Command::kAuditBBound: {
      const auto family = audit::solve_family(cfg.solve_config(), a.scales);
      auto r = command == Command::kAuditC0   ? audit::audit_c0(family, a.spread)
               : command == Command::kAuditC2 ? audit::audit_c2(family, a.spread)
                                              : audit::audit_b_bound(family, cfg.problem.n, cfg.problem.k,
                                                                     cfg.problem.metric.preset ==
                                                                         geometry::MetricPreset::kEuclidean,
                                                                     a.slack);
      return from_audit(std::move(r));
    }
    default:
      throw ConfigError("not an audit command");
  }
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Writes through a temporary file so readers never see a partial report.
void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    os << content;
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& entry : node) out[entry.first.Scalar()] = yaml_to_json(entry.second);
      return out;
    }
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item));
      return out;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted in the source
      long long i = 0;
      double d = 0.0;
      bool b = false;
      if (YAML::convert<long long>::decode(node, i)) return i;
      if (YAML::convert<double>::decode(node, d)) return d;
      if (YAML::convert<bool>::decode(node, b)) return b;
      return s;
    }
    default:
      return nullptr;
  }
}

fs::path resolve_output_dir(const std::optional<std::string>& configured) {
  if (configured) return *configured;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "khessian-out";
}

int run(const Invocation& inv, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  json report = {{"schema_version", 1}, {"tool", "khessian"}, {"errors", json::array()}};
  report["command"] = inv.command + (inv.audit.empty() ? "" : " " + inv.audit);
  report["config_path"] = inv.config.string();

  std::optional<std::string> configured_dir;
  int code = kExitFailure;
  Outcome outcome;
  try {
    const Command command = parse_command(inv.command, inv.audit);
    report["command"] = to_string(command);
    const RunConfig cfg = load_config(inv.config, command, inv.overrides, inv.seed);
    configured_dir = cfg.output.directory;
    report["config"] = yaml_to_json(cfg.effective);
    report["seed"] = cfg.seed;
    const fs::path dir = resolve_output_dir(configured_dir);
    fs::create_directories(dir);
    log << "khessian: " << to_string(command) << " -> " << dir.string() << "\n";

    switch (command) {
      case Command::kSolve: outcome = run_solve(cfg, dir, false); break;
      case Command::kMms: outcome = run_solve(cfg, dir, true); break;
      case Command::kSampleCone: outcome = run_sample_cone(cfg); break;
      default: outcome = run_audit(command, cfg, dir); break;
    }
    if (outcome.result.contains("error")) report["errors"].push_back(outcome.result["error"]);
    if (outcome.result.contains("violations"))
      for (const auto& v : outcome.result["violations"]) report["errors"].push_back(v);
    code = outcome.pass ? kExitPass : kExitFailure;
  } catch (const ConfigError& e) {
    report["errors"].push_back(std::string("config error: ") + e.what());
    code = kExitConfigError;
  } catch (const std::exception& e) {
    report["errors"].push_back(e.what());
    code = kExitFailure;
  }

  report["status"] = code == kExitPass ? "pass" : code == kExitConfigError ? "config_error" : "fail";
  report["exit_code"] = code;
  report["result"] = outcome.result;
  report["artifacts"] = {{"report", "report.json"}, {"fields", outcome.fields}};
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report["timing"] = {{"started_utc", utc_now()}, {"wall_seconds", wall}, {"solver_seconds", outcome.solver_seconds}};

  try {
    const fs::path dir = resolve_output_dir(configured_dir);
    fs::create_directories(dir);
    if (code != kExitConfigError) {
      std::ostringstream csv;
      outcome.table.write_csv(csv);
      write_atomically(dir / "rows.csv", csv.str());
      report["artifacts"]["rows"] = "rows.csv";
    }
    write_atomically(dir / "report.json", report.dump(2) + "\n");
  } catch (const std::exception& e) {
    log << "khessian: cannot write outputs: " << e.what() << "\n";
    if (code == kExitPass) code = kExitFailure;
  }
  for (const auto& err : report["errors"]) log << "khessian: " << err.get<std::string>() << "\n";
  log << "khessian: " << report["status"].get<std::string>() << "\n";
  return code;
}

}  // namespace khessian::cli
