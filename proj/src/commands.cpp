#include "dispatchsim/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include <json.hpp>

#include "dispatchsim/config_file.hpp"
#include "dispatchsim/oracle.hpp"
#include "dispatchsim/trace_io.hpp"

namespace dispatchsim {

namespace fs = std::filesystem;

namespace {

// One machine-readable line to stdout, one human line to stderr.
int emit_error(const char* kind, const std::string& message, int code) {
  nlohmann::json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  std::cout << j.dump() << "\n";
  std::cerr << "error: " << message << "\n";
  return code;
}

// Maps the in-flight exception onto the exit-code contract.
int handle_current_exception() {
  try {
    throw;
  } catch (const ConfigError& e) {
    return emit_error("config", e.what(), kExitUsage);
  } catch (const ValidationError& e) {
    return emit_error("config", e.what(), kExitUsage);
  } catch (const SimulationError& e) {
    return emit_error("simulation", e.what(), kExitSimulation);
  } catch (const NoRootError& e) {
    return emit_error("simulation", e.what(), kExitSimulation);
  } catch (const AmbiguousRootError& e) {
    return emit_error("simulation", e.what(), kExitSimulation);
  } catch (const std::invalid_argument& e) {
    return emit_error("config", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return emit_error("usage", e.what(), kExitUsage);
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out.good())
    throw std::runtime_error("cannot write '" + path.string() + "'");
}

nlohmann::json solution_to_json(const std::string& mode,
                                const DispatchSolution& sol) {
  nlohmann::json j;
  j["mode"] = mode;
  j["lambda_star"] = sol.lambda_star;
  j["p_star"] = sol.p_star;
  j["p_mg_star"] = sol.p_mg_star;
  j["total_loss"] = sol.total_loss;
  j["total_cost"] = sol.total_cost;
  auto upper = nlohmann::json::array();
  for (int i : sol.active_upper) upper.push_back(i + 1);  // 1-based for output
  auto lower = nlohmann::json::array();
  for (int i : sol.active_lower) lower.push_back(i + 1);
  j["active_upper"] = std::move(upper);
  j["active_lower"] = std::move(lower);
  return j;
}

}  // namespace

int cmd_run(const RunOptions& opt) {
  try {
    if (opt.format != "csv" && opt.format != "json")
      throw std::runtime_error("unknown trace format '" + opt.format +
                               "' (expected csv or json)");
    const auto cfg = parse_scenario_file(opt.config_path);
    const auto trace = run(cfg);
    const auto summary = build_summary(cfg, trace, opt.oracle_check);

    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);
    const fs::path trace_path =
        dir / (opt.format == "csv" ? "trace.csv" : "trace.json");
    write_file(trace_path, opt.format == "csv" ? trace_to_csv(trace)
                                               : trace_to_json(trace) + "\n");
    if (opt.long_csv) write_file(dir / "trace_long.csv", trace_to_long_csv(trace));
    write_file(dir / "summary.json", summary.dump(2) + "\n");

    if (!opt.quiet)
      std::cout << "wrote " << trace_path.string() << " and "
                << (dir / "summary.json").string() << " (" << trace.records.size()
                << " records)\n";
    return kExitOk;
  } catch (...) {
    return handle_current_exception();
  }
}

int cmd_oracle(const OracleOptions& opt) {
  try {
    const auto cfg = parse_scenario_file(opt.config_path);
    DispatchSolution sol;
    if (opt.mode == "grid")
      sol = solve_grid_connected(cfg.system);
    else if (opt.mode == "isolated")
      sol = solve_isolated(cfg.system);
    else
      throw std::runtime_error("unknown oracle mode '" + opt.mode +
                               "' (expected grid or isolated)");
    std::cout << solution_to_json(opt.mode, sol).dump() << "\n";
    return kExitOk;
  } catch (...) {
    return handle_current_exception();
  }
}

int cmd_check(const CheckOptions& opt) {
  try {
    if (opt.format != "text" && opt.format != "json")
      throw std::runtime_error("unknown check format '" + opt.format +
                               "' (expected text or json)");
    const auto cfg = parse_scenario_file(opt.config_path);
    const auto report = validate(cfg);

    if (opt.format == "json") {
      nlohmann::json j;
      j["ok"] = report.ok;
      auto items = nlohmann::json::array();
      for (const auto& it : report.items) {
        items.push_back({{"name", it.name},
                         {"pass", it.pass},
                         {"hard", it.hard},
                         {"detail", it.detail}});
      }
      j["items"] = std::move(items);
      std::cout << j.dump() << "\n";
    } else {
      int hard_failures = 0;
      for (const auto& it : report.items) {
        if (it.pass) continue;
        if (it.hard) ++hard_failures;
        std::cout << (it.hard ? "fail" : "warn") << " " << it.name
                  << (it.detail.empty() ? "" : ": " + it.detail) << "\n";
      }
      if (report.ok)
        std::cout << "ok (" << report.items.size() << " checks passed)\n";
      else
        std::cout << "invalid (" << hard_failures << " hard failure"
                  << (hard_failures == 1 ? "" : "s") << ")\n";
    }
    return report.ok ? kExitOk : kExitUsage;
  } catch (...) {
    return handle_current_exception();
  }
}

std::vector<SweepEntry> run_sweep(const ScenarioConfig& base, const std::string& param,
                                  const std::vector<double>& values) {
  const auto run_one = [&base, &param](double v) -> SweepEntry {
    ScenarioConfig cfg = base;
    const int n = cfg.system.size();
    if (param == "eps")
      cfg.protocol_cfg.eps = Eigen::VectorXd::Constant(n, v);
    else if (param == "mu")
      cfg.protocol_cfg.mu = v;
    else if (param == "sigma")
      cfg.protocol_cfg.sigma.exponent = v;
    else
      throw std::invalid_argument("unknown sweep parameter '" + param +
                                  "' (expected eps, mu, or sigma)");

    SweepEntry entry;
    entry.value = v;
    const auto trace = run(cfg);
    const auto& last = trace.records.back();
    const auto sys = effective_system(cfg, last.round);
    const auto sol =
        last.mode != 0 ? solve_grid_connected(sys) : solve_isolated(sys);

    // Latest round still violating each tolerance; settled one round later
    // and staying settled through the horizon.
    long lambda_bad = -1;
    long pmg_bad = -1;
    for (long r = 0; r < static_cast<long>(trace.records.size()); ++r) {
      const auto& rec = trace.records[r];
      double lambda_err = 0.0;
      for (const auto& a : rec.agents)
        lambda_err = std::max(lambda_err, std::abs(a.lambda_i - sol.lambda_star));
      if (lambda_err >= 1e-3) lambda_bad = r;
      if (std::abs(rec.p_mg - sol.p_mg_star) >= 0.01) pmg_bad = r;
    }
    const long horizon = static_cast<long>(trace.records.size()) - 1;
    if (lambda_bad < horizon) entry.lambda_round = lambda_bad + 1;
    if (pmg_bad < horizon) entry.pmg_round = pmg_bad + 1;
    entry.converged =
        entry.lambda_round.has_value() && entry.pmg_round.has_value();
    return entry;
  };

  std::vector<std::future<SweepEntry>> pending;
  pending.reserve(values.size());
  for (double v : values)
    pending.push_back(std::async(std::launch::async, run_one, v));
  std::vector<SweepEntry> out;
  out.reserve(values.size());
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

int cmd_sweep(const SweepOptions& opt) {
  try {
    if (opt.param != "eps" && opt.param != "mu" && opt.param != "sigma")
      throw std::runtime_error("unknown sweep parameter '" + opt.param +
                               "' (expected eps, mu, or sigma)");
    if (opt.values.empty())
      throw std::runtime_error("sweep needs at least one --values entry");
    if (opt.format != "text" && opt.format != "json")
      throw std::runtime_error("unknown sweep format '" + opt.format +
                               "' (expected text or json)");
    const auto cfg = parse_scenario_file(opt.config_path);
    const auto entries = run_sweep(cfg, opt.param, opt.values);

    if (opt.format == "json") {
      nlohmann::json j;
      j["param"] = opt.param;
      auto arr = nlohmann::json::array();
      for (const auto& e : entries) {
        nlohmann::json row;
        row["value"] = e.value;
        if (e.lambda_round.has_value())
          row["lambda_round"] = *e.lambda_round;
        else
          row["lambda_round"] = nullptr;
        if (e.pmg_round.has_value())
          row["pmg_round"] = *e.pmg_round;
        else
          row["pmg_round"] = nullptr;
        row["converged"] = e.converged;
        arr.push_back(std::move(row));
      }
      j["entries"] = std::move(arr);
      std::cout << j.dump() << "\n";
    } else {
      for (const auto& e : entries) {
        std::cout << opt.param << "=" << e.value << ": ";
        if (e.converged)
          std::cout << "lambda settles at round " << *e.lambda_round
                    << ", exchange at round " << *e.pmg_round << "\n";
        else
          std::cout << "not settled within the horizon\n";
      }
    }
    return kExitOk;
  } catch (...) {
    return handle_current_exception();
  }
}

}  // namespace dispatchsim
