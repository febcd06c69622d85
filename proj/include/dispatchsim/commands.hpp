#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dispatchsim/scenario.hpp"

namespace dispatchsim {

// Command layer shared by the CLI binary, the acceptance suite, and the
// python bindings. Exit codes: 0 success, 1 simulation error (non-finite
// state, no islanded root), 2 usage/config error (unreadable or invalid
// config, violated assumptions, bad flag values). Failures print a one-line
// machine-readable JSON error object to stdout and a human line to stderr.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSimulation = 1;
inline constexpr int kExitUsage = 2;

struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";  // csv | json trace flavor
  bool oracle_check = false;    // add oracle comparison to summary.json
  bool long_csv = false;        // additionally write trace_long.csv
  bool quiet = false;
};
int cmd_run(const RunOptions& opt);

struct OracleOptions {
  std::string config_path;
  std::string mode = "grid";  // grid | isolated
  bool quiet = false;
};
int cmd_oracle(const OracleOptions& opt);

struct CheckOptions {
  std::string config_path;
  std::string format = "text";  // text | json
};
int cmd_check(const CheckOptions& opt);

// Sweeps rerun the scenario with one knob changed per value: "eps" (uniform
// price step), "mu" (mismatch step), or "sigma" (feedback-gain exponent, gain
// 1/(1+k)^a). Convergence rounds are measured against the mode-appropriate
// centralized optimum: the earliest round after which max_i |lambda_i -
// lambda*| stays below 1e-3 (price round) and |p_mg - p_mg*| stays below 0.01
// MW (exchange round) through the horizon.
struct SweepEntry {
  double value = 0.0;
  std::optional<long> lambda_round;
  std::optional<long> pmg_round;
  bool converged = false;  // both rounds found
};
std::vector<SweepEntry> run_sweep(const ScenarioConfig& base, const std::string& param,
                                  const std::vector<double>& values);

struct SweepOptions {
  std::string config_path;
  std::string param;            // eps | mu | sigma
  std::vector<double> values;
  std::string format = "text";  // text | json
  bool quiet = false;
};
int cmd_sweep(const SweepOptions& opt);

}  // namespace dispatchsim
