#include <iostream>

#include <CLI11.hpp>

#include "khessian/cli/run.hpp"

int main(int argc, char** argv) {
  using khessian::cli::Invocation;

  CLI::App app{"Numerical solver and estimate audits for the complex k-Hessian equation on flat tori"};
  app.require_subcommand(1);
  Invocation inv;

  const auto add_common = [&inv](CLI::App* sub) {
    sub->add_option("--config", inv.config, "YAML configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", inv.overrides, "Override a config value, e.g. --set problem.N=24")
        ->type_name("KEY=VALUE")
        ->take_all();
    sub->add_option("--seed", inv.seed, "Override the config seed");
  };

  add_common(app.add_subcommand("solve", "Solve for (u, b) with the configured source"));
  add_common(app.add_subcommand("mms", "Solve a manufactured problem and report the recovery error"));
  add_common(app.add_subcommand("sample-cone", "Write deterministic Gamma_k samples to rows.csv"));
  auto* audit = app.add_subcommand("audit", "Run one audit");
  audit->add_option("name", inv.audit, "Audit name")
      ->required()
      ->check(CLI::IsMember(khessian::cli::audit_names()));
  add_common(audit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : khessian::cli::kExitConfigError;
  }
  inv.command = app.get_subcommands().front()->get_name();
  return khessian::cli::run(inv, std::cerr);
}
