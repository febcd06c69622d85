#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dispatchsim/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"distributed economic dispatch simulator"};
  app.require_subcommand(1);

  dispatchsim::RunOptions run_opt;
  auto* run = app.add_subcommand("run", "simulate a scenario and write the trace");
  run->add_option("config", run_opt.config_path, "scenario file")->required();
  run->add_option("--out", run_opt.out_dir, "output directory (default: .)");
  run->add_option("--format", run_opt.format, "trace format: csv or json");
  run->add_flag("--oracle-check", run_opt.oracle_check,
                "compare the final state against the centralized optimum");
  run->add_flag("--long-csv", run_opt.long_csv,
                "also write trace_long.csv (round,series,value)");
  run->add_flag("--quiet", run_opt.quiet, "suppress the success line");

  dispatchsim::OracleOptions oracle_opt;
  auto* oracle =
      app.add_subcommand("oracle", "print the centralized optimum as JSON");
  oracle->add_option("config", oracle_opt.config_path, "scenario file")->required();
  oracle->add_option("--mode", oracle_opt.mode, "grid or isolated");
  oracle->add_flag("--quiet", oracle_opt.quiet, "no extra output");

  dispatchsim::CheckOptions check_opt;
  auto* check = app.add_subcommand("check", "validate a scenario file");
  check->add_option("config", check_opt.config_path, "scenario file")->required();
  check->add_option("--format", check_opt.format, "text or json");

  dispatchsim::SweepOptions sweep_opt;
  auto* sweep = app.add_subcommand(
      "sweep", "measure convergence rounds across one parameter");
  sweep->add_option("config", sweep_opt.config_path, "scenario file")->required();
  sweep->add_option("--param", sweep_opt.param, "eps, mu, or sigma")->required();
  sweep->add_option("--values", sweep_opt.values, "parameter values to try")
      ->required()
      ->expected(-1);
  sweep->add_option("--format", sweep_opt.format, "text or json");
  sweep->add_flag("--quiet", sweep_opt.quiet, "no extra output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    nlohmann::json j;
    j["error"]["kind"] = "usage";
    j["error"]["message"] = e.what();
    std::cout << j.dump() << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return dispatchsim::kExitUsage;
  }

  if (run->parsed()) return dispatchsim::cmd_run(run_opt);
  if (oracle->parsed()) return dispatchsim::cmd_oracle(oracle_opt);
  if (check->parsed()) return dispatchsim::cmd_check(check_opt);
  if (sweep->parsed()) return dispatchsim::cmd_sweep(sweep_opt);
  return dispatchsim::kExitUsage;
}
