#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "khessian/cli/config.hpp"

namespace khessian::cli {

enum ExitCode : int { kExitPass = 0, kExitFailure = 1, kExitConfigError = 2 };

/// Environment variable naming the output directory when the config has none.
inline constexpr const char* kOutputDirEnv = "KHESSIAN_OUTPUT_DIR";

struct Invocation {
  std::string command;
  std::string audit;  // only for `audit`
  std::filesystem::path config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

/// Runs one command and writes report.json and rows.csv (plus field dumps when
/// requested) to the output directory. Progress and errors go to `log`.
int run(const Invocation& invocation, std::ostream& log);

/// Scalar values become numbers or booleans where they parse as such.
nlohmann::json yaml_to_json(const YAML::Node& node);

/// Config value, else $KHESSIAN_OUTPUT_DIR, else "khessian-out".
std::filesystem::path resolve_output_dir(const std::optional<std::string>& configured);

}  // namespace khessian::cli
