#include "khessian/cli/config.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "khessian/errors.hpp"
#include "khessian/linalg.hpp"

namespace khessian::cli {

namespace {

constexpr std::array<std::pair<const char*, Command>, 9> kAudits = {{
    {"basic-inequality", Command::kAuditBasicInequality},
    {"lemma21", Command::kAuditLemma21},
    {"lemma22", Command::kAuditLemma22},
    {"cherrier", Command::kAuditCherrier},
    {"c0", Command::kAuditC0},
    {"c2", Command::kAuditC2},
    {"b-bound", Command::kAuditBBound},
    {"commutation", Command::kAuditCommutation},
    {"operator-identities", Command::kAuditOperatorIdentities},
}};

// Walks a YAML tree while remembering the dotted key path, so every
// diagnostic can say which key was wrong and where it was written.
class Reader {
 public:
  Reader(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {}

  const YAML::Node& node() const { return node_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    const YAML::Mark mark = node_.Mark();
    if (mark.line >= 0 && !mark.is_null())
      os << source_ << ":" << mark.line + 1 << ":" << mark.column + 1 << ": ";
    else
      os << source_ << ": ";
    os << "'" << (path_.empty() ? std::string("<root>") : path_) << "': " << what;
    throw ConfigError(os.str());
  }

  void require_map() const {
    if (!node_.IsMap()) fail("expected a mapping");
  }

  // Rejects keys outside `allowed`.
  void check_keys(std::initializer_list<const char*> allowed) const {
    require_map();
    for (const auto& entry : node_) {
      const auto key = entry.first.as<std::string>();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        Reader(entry.first, join(key), source_).fail("unknown key (allowed: " + list + ")");
      }
    }
  }

  bool has(const char* key) const { return node_.IsMap() && node_[key]; }

  Reader child(const char* key) const { return Reader(node_[key], join(key), source_); }
  Reader element(std::size_t i) const {
    return Reader(node_[i], path_ + "[" + std::to_string(i) + "]", source_);
  }

  template <class T>
  T as(const char* expected) const {
    if (!node_.IsScalar()) fail(std::string("expected ") + expected);
    try {
      return node_.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(std::string("expected ") + expected + ", got '" + node_.Scalar() + "'");
    }
  }

  template <class T>
  void read(const char* key, T& out, const char* expected) const {
    if (has(key)) out = child(key).template as<T>(expected);
  }

  std::size_t sequence_size() const {
    if (!node_.IsSequence()) fail("expected a list");
    return node_.size();
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
};

int read_int(const Reader& r) { return r.as<int>("an integer"); }
double read_double(const Reader& r) { return r.as<double>("a number"); }

std::size_t read_count(const Reader& r) {
  // Accept 1e5-style counts as long as they are whole numbers.
  const double v = read_double(r);
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint64_t>(v)) || v > 1e12)
    r.fail("expected a non-negative whole number");
  return static_cast<std::size_t>(v);
}

template <class T, class F>
std::vector<T> read_list(const Reader& r, F&& item) {
  std::vector<T> out;
  const std::size_t size = r.sequence_size();
  for (std::size_t i = 0; i < size; ++i) out.push_back(item(r.element(i)));
  return out;
}

geometry::MetricSpec read_metric(const Reader& r) {
  geometry::MetricSpec spec;
  std::string preset;
  if (r.node().IsScalar()) {
    preset = r.as<std::string>("a preset name");
  } else {
    r.check_keys({"preset", "strength"});
    if (!r.has("preset")) r.fail("missing 'preset'");
    preset = r.child("preset").as<std::string>("a preset name");
  }
  try {
    spec.preset = geometry::parse_metric_preset(preset);
  } catch (const DomainError& e) {
    r.fail(e.what());
  }
  switch (spec.preset) {
    case geometry::MetricPreset::kEuclidean: spec = geometry::MetricSpec::euclidean(); break;
    case geometry::MetricPreset::kKahler: spec = geometry::MetricSpec::kahler(); break;
    case geometry::MetricPreset::kTorsion: spec = geometry::MetricSpec::torsion(); break;
  }
  if (r.node().IsMap()) r.read("strength", spec.strength, "a number");
  if (spec.preset == geometry::MetricPreset::kTorsion && !(spec.strength >= 0.0 && spec.strength <= 0.2))
    r.fail("torsion strength must lie in [0, 0.2]");
  if (spec.preset == geometry::MetricPreset::kEuclidean && spec.strength != 0.0)
    r.fail("the euclidean preset takes no strength");
  return spec;
}

std::vector<geometry::TrigTerm> read_terms(const Reader& r, int n) {
  return read_list<geometry::TrigTerm>(r, [n](const Reader& e) {
    e.check_keys({"amplitude", "frequency", "phase"});
    geometry::TrigTerm t;
    if (!e.has("amplitude")) e.fail("missing 'amplitude'");
    t.amplitude = read_double(e.child("amplitude"));
    e.read("phase", t.phase, "a number");
    if (e.has("frequency")) {
      const Reader f = e.child("frequency");
      t.frequency = read_list<int>(f, read_int);
      if (static_cast<int>(t.frequency.size()) != 2 * n)
        f.fail("frequency must have 2n = " + std::to_string(2 * n) + " entries");
    } else {
      t.frequency.assign(static_cast<std::size_t>(2 * n), 0);
    }
    return t;
  });
}

std::vector<geometry::TrigTerm> default_u_star(int n) {
  // cos 2πx₁ cos 2πy₁ = ½cos 2π(x₁+y₁) + ½cos 2π(x₁-y₁), plus cos 2πx₂.
  const auto freq = [n](std::initializer_list<std::pair<int, int>> entries) {
    std::vector<int> f(static_cast<std::size_t>(2 * n), 0);
    for (auto [axis, value] : entries) f[static_cast<std::size_t>(axis)] = value;
    return f;
  };
  return {{0.5, freq({{0, 1}, {1, 1}}), 0.0}, {0.5, freq({{0, 1}, {1, -1}}), 0.0}, {1.0, freq({{2, 1}}), 0.0}};
}

void read_problem(const Reader& r, ProblemBlock& p) {
  r.check_keys({"n", "k", "N", "metric", "f", "u_star"});
  r.read("n", p.n, "an integer");
  r.read("k", p.k, "an integer");
  r.read("N", p.samples, "an integer");
  if (p.n < 2 || p.n > kMaxDim) r.fail("n must lie in [2, " + std::to_string(kMaxDim) + "]");
  if (p.k < 1 || p.k > p.n) r.fail("k must satisfy 1 <= k <= n");
  if (r.has("metric")) p.metric = read_metric(r.child("metric"));
  if (r.has("f")) {
    const Reader f = r.child("f");
    f.check_keys({"terms", "file"});
    if (f.has("terms") && f.has("file")) f.fail("give either 'terms' or 'file', not both");
    if (f.has("terms")) p.f_terms = read_terms(f.child("terms"), p.n);
    if (f.has("file")) p.f_file = f.child("file").as<std::string>("a path");
  }
  if (r.has("u_star")) {
    const Reader u = r.child("u_star");
    u.check_keys({"amplitude", "terms"});
    u.read("amplitude", p.u_star_amplitude, "a number");
    if (u.has("terms")) p.u_star_terms = read_terms(u.child("terms"), p.n);
  }
  if (p.u_star_terms.empty()) p.u_star_terms = default_u_star(p.n);
}

void read_solver(const Reader& r, solver::SolverOptions& s) {
  r.check_keys({"continuation_steps", "tolerance", "max_newton_iterations", "shrink", "min_step", "linear"});
  r.read("continuation_steps", s.continuation_steps, "an integer");
  r.read("tolerance", s.tolerance, "a number");
  r.read("max_newton_iterations", s.max_newton_iterations, "an integer");
  r.read("shrink", s.shrink, "a number");
  r.read("min_step", s.min_step, "a number");
  if (r.has("linear")) {
    const Reader l = r.child("linear");
    l.check_keys({"tolerance", "restart", "max_iterations"});
    l.read("tolerance", s.linear.relative_tolerance, "a number");
    l.read("restart", s.linear.restart, "an integer");
    l.read("max_iterations", s.linear.max_iterations, "an integer");
  }
}

void read_audit(const Reader& r, AuditBlock& a) {
  r.check_keys({"samples", "cases", "perturbations", "fd_step", "fd_margin", "euler_tolerance", "gradient_tolerance",
                "concavity_tolerance", "stability", "solution", "mms_error_tolerance", "mms_b_tolerance",
                "exponents", "cherrier_factor", "scales", "spread", "slack", "metrics", "grids", "orders",
                "ratio_per_doubling", "floor_order3", "floor_order4", "mutation_control", "count", "scale"});
  if (r.has("samples")) a.samples = read_count(r.child("samples"));
  if (r.has("perturbations")) a.perturbations = read_count(r.child("perturbations"));
  if (r.has("count")) a.count = read_count(r.child("count"));
  if (r.has("cases")) {
    a.cases = read_list<std::pair<int, int>>(r.child("cases"), [](const Reader& e) {
      const auto pair = read_list<int>(e, read_int);
      if (pair.size() != 2) e.fail("expected [n, k]");
      return std::make_pair(pair[0], pair[1]);
    });
  }
  r.read("fd_step", a.fd_step, "a number");
  r.read("fd_margin", a.fd_margin, "a number");
  r.read("euler_tolerance", a.euler_tolerance, "a number");
  r.read("gradient_tolerance", a.gradient_tolerance, "a number");
  r.read("concavity_tolerance", a.concavity_tolerance, "a number");
  r.read("stability", a.stability, "a number");
  if (r.has("solution")) {
    const Reader s = r.child("solution");
    const auto v = s.as<std::string>("'mms' or 'solve'");
    if (v == "mms")
      a.solution = SolutionSource::kManufactured;
    else if (v == "solve")
      a.solution = SolutionSource::kSolve;
    else
      s.fail("expected 'mms' or 'solve'");
  }
  r.read("mms_error_tolerance", a.mms_error_tolerance, "a number");
  r.read("mms_b_tolerance", a.mms_b_tolerance, "a number");
  if (r.has("exponents")) a.exponents = read_list<double>(r.child("exponents"), read_double);
  r.read("cherrier_factor", a.cherrier_factor, "a number");
  if (r.has("scales")) a.scales = read_list<double>(r.child("scales"), read_double);
  r.read("spread", a.spread, "a number");
  r.read("slack", a.slack, "a number");
  if (r.has("metrics")) a.metrics = read_list<geometry::MetricSpec>(r.child("metrics"), read_metric);
  if (r.has("grids")) {
    const Reader g = r.child("grids");
    a.grids = read_list<int>(g, read_int);
    if (!std::is_sorted(a.grids.begin(), a.grids.end()) || a.grids.size() < 2) g.fail("expected >= 2 increasing sizes");
  }
  if (r.has("orders")) {
    const Reader o = r.child("orders");
    a.orders = read_list<int>(o, read_int);
    for (int v : a.orders)
      if (v != 3 && v != 4) o.fail("orders must be 3 or 4");
  }
  r.read("ratio_per_doubling", a.ratio_per_doubling, "a number");
  r.read("floor_order3", a.floor_order3, "a number");
  r.read("floor_order4", a.floor_order4, "a number");
  r.read("mutation_control", a.mutation_control, "true or false");
  r.read("scale", a.scale, "a number");
  if (a.exponents.empty()) r.fail("exponents must not be empty");
  if (a.scales.empty()) r.fail("scales must not be empty");
  if (!(a.scale > 0.0)) r.fail("scale must be positive");
}

void read_output(const Reader& r, OutputBlock& o) {
  r.check_keys({"directory", "dump_fields"});
  if (r.has("directory")) o.directory = r.child("directory").as<std::string>("a path");
  r.read("dump_fields", o.dump_fields, "true or false");
}

// Rebuilds a node without source marks, so diagnostics about overridden keys
// do not point at a line of the config file.
YAML::Node without_marks(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Scalar: return YAML::Node(node.Scalar());
    case YAML::NodeType::Sequence: {
      YAML::Node out(YAML::NodeType::Sequence);
      for (const auto& item : node) out.push_back(without_marks(item));
      return out;
    }
    case YAML::NodeType::Map: {
      YAML::Node out(YAML::NodeType::Map);
      for (const auto& entry : node) out[entry.first.Scalar()] = without_marks(entry.second);
      return out;
    }
    default: return YAML::Node();
  }
}

}  // namespace

Command parse_command(const std::string& command, const std::string& audit_name) {
  if (command == "solve") return Command::kSolve;
  if (command == "mms") return Command::kMms;
  if (command == "sample-cone") return Command::kSampleCone;
  if (command == "audit") {
    for (const auto& [name, cmd] : kAudits)
      if (audit_name == name) return cmd;
    throw ConfigError("unknown audit '" + audit_name + "'");
  }
  throw ConfigError("unknown command '" + command + "'");
}

std::string to_string(Command command) {
  switch (command) {
    case Command::kSolve: return "solve";
    case Command::kMms: return "mms";
    case Command::kSampleCone: return "sample-cone";
    default: break;
  }
  for (const auto& [name, cmd] : kAudits)
    if (cmd == command) return std::string("audit ") + name;
  return "unknown";
}

std::vector<std::string> audit_names() {
  std::vector<std::string> out;
  for (const auto& entry : kAudits) out.emplace_back(entry.first);
  return out;
}

solver::SolveConfig RunConfig::solve_config() const {
  solver::SolveConfig c;
  c.n = problem.n;
  c.k = problem.k;
  c.samples = problem.samples;
  c.metric = problem.metric;
  c.f_terms = problem.f_terms;
  c.f_file = problem.f_file;
  c.options = solver;
  c.seed = seed;
  return c;
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set '" + assignment + "': expected key.path=value");
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = without_marks(YAML::Load(assignment.substr(eq + 1)));
  } catch (const YAML::Exception& e) {
    throw ConfigError("--set '" + path + "': " + e.msg);
  }
  if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);

  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("--set '" + path + "': empty key component");
    keys.push_back(part);
  }
  // yaml-cpp nodes are handles; reset() rebinds instead of assigning content.
  YAML::Node cursor;
  cursor.reset(root);
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!cursor.IsMap()) throw ConfigError("--set '" + path + "': '" + keys[i] + "' is not inside a mapping");
    YAML::Node next = cursor[keys[i]];
    if (!next.IsDefined() || next.IsNull()) {
      cursor[keys[i]] = YAML::Node(YAML::NodeType::Map);
      next = cursor[keys[i]];
    }
    cursor.reset(next);
  }
  if (!cursor.IsMap()) throw ConfigError("--set '" + path + "': parent is not a mapping");
  cursor[keys.back()] = value;
}

bool uses_field_problem(Command command) {
  switch (command) {
    case Command::kSolve:
    case Command::kMms:
    case Command::kAuditLemma22:
    case Command::kAuditCherrier:
    case Command::kAuditC0:
    case Command::kAuditC2:
    case Command::kAuditBBound:
      return true;
    default:
      return false;
  }
}

RunConfig parse_config(const YAML::Node& root, Command command, const std::string& source_name) {
  RunConfig cfg;
  const Reader r(root, "", source_name);
  if (root.IsDefined() && !root.IsNull()) {
    r.check_keys({"problem", "solver", "audit", "output", "seed"});
    if (r.has("problem")) read_problem(r.child("problem"), cfg.problem);
    if (r.has("solver")) read_solver(r.child("solver"), cfg.solver);
    if (r.has("audit")) read_audit(r.child("audit"), cfg.audit);
    if (r.has("output")) read_output(r.child("output"), cfg.output);
    r.read("seed", cfg.seed, "a non-negative integer");
  }
  if (cfg.problem.u_star_terms.empty()) cfg.problem.u_star_terms = default_u_star(cfg.problem.n);
  if (uses_field_problem(command)) {
    try {
      cfg.solve_config().validate();
    } catch (const DomainError& e) {
      r.fail(e.what());
    }
  }
  cfg.effective = YAML::Clone(root);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, Command command, const std::vector<std::string>& overrides,
                      std::optional<std::uint64_t> seed) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError(path.string() + ": cannot open config file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path.string() + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
  for (const auto& o : overrides) apply_override(root, o);
  if (seed) {
    if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    root["seed"] = *seed;
  }
  return parse_config(root, command, path.string());
}

}  // namespace khessian::cli
