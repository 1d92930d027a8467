// edgemarket: generate instances, solve them under one mechanism, and run
// batch experiments and sensitivity sweeps.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using edgemarket::cli::Overrides;

void add_common(CLI::App* cmd, Overrides& o, std::string& config) {
  cmd->add_option("--config", config,
                  "Config file; relative names are also looked up in $EDGEMARKET_CONFIG_DIR");
  cmd->add_option("--seed", o.seed, "Override the config seed");
}

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--mechanism", o.mechanisms, "Mechanisms to run: ME, SO, WSO, PS")
      ->delimiter(',');
  cmd->add_option("--workers", o.workers, "Worker threads (0 = all hardware threads)");
}

void add_tolerance_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--kkt-tol", o.kkt_tolerance, "KKT residual tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--certificates", o.certificates, "Evaluate certificates (true/false)");
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = edgemarket::cli;
  CLI::App app{"Fisher-market allocation of RAN and edge-computing resources"};
  app.require_subcommand(1);

  Overrides generate_o, solve_o, experiment_o, sweep_o;
  std::string generate_config, experiment_config, sweep_config, sweep_kind;
  std::string generate_out, solve_out, experiment_out, sweep_out;
  std::string instance_file, solve_mechanism = "ME";

  auto* generate = app.add_subcommand("generate", "Generate one instance from a deployment config");
  add_common(generate, generate_o, generate_config);
  generate->add_option("--out", generate_out, "Instance file (stdout if omitted)");

  auto* solve = app.add_subcommand("solve", "Solve one instance file under one mechanism");
  solve->add_option("instance", instance_file, "Instance file")->required();
  solve->add_option("--mechanism", solve_mechanism, "ME, SO, WSO or PS")
      ->check(CLI::IsMember({"ME", "SO", "WSO", "PS"}, CLI::ignore_case));
  add_tolerance_flags(solve, solve_o);
  solve->add_option("--out", solve_out, "Result file (JSON)");

  auto* experiment = app.add_subcommand("experiment", "Run a batch of generated instances");
  add_common(experiment, experiment_o, experiment_config);
  add_run_flags(experiment, experiment_o);
  add_tolerance_flags(experiment, experiment_o);
  experiment->add_option("--out", experiment_out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Sensitivity sweep over budget, nodes or cells");
  add_common(sweep, sweep_o, sweep_config);
  add_run_flags(sweep, sweep_o);
  sweep->add_option("--kind", sweep_kind, "budget, nodes or cells")
      ->check(CLI::IsMember({"budget", "nodes", "cells"}));
  sweep->add_option("--kkt-tol", sweep_o.kkt_tolerance, "KKT residual tolerance")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "CSV file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::exit_usage;
  }

  if (*generate) {
    return cli::cmd_generate(generate_config, generate_o, generate_out, std::cout, std::cerr);
  }
  if (*solve) {
    return cli::cmd_solve(instance_file, solve_mechanism, solve_o, solve_out, std::cout, std::cerr);
  }
  if (*experiment) {
    return cli::cmd_experiment(experiment_config, experiment_o, experiment_out, std::cout,
                               std::cerr);
  }
  return cli::cmd_sweep(sweep_config, sweep_kind, sweep_o, sweep_out, std::cout, std::cerr);
}
