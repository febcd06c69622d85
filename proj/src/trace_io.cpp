#include "dispatchsim/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "dispatchsim/oracle.hpp"

namespace dispatchsim {

namespace {

// Shortest round-trip formatting: parsing the text recovers the value, and
// identical runs serialize identically. Negative zero prints as plain 0.
void append_double(std::string& out, double v) {
  char buf[32];
  if (v == 0.0) v = 0.0;  // canonicalize the zero sign
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::string fmt_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

}  // namespace

std::string trace_to_csv(const SimulationTrace& trace) {
  const int n = trace.n_icus;
  std::string out = "round";
  for (int i = 0; i < n; ++i) out += ",lambda_" + std::to_string(i + 1);
  for (int i = 0; i < n; ++i) out += ",p_" + std::to_string(i + 1);
  for (int i = 0; i < n; ++i) out += ",mismatch_est_" + std::to_string(i + 1);
  out +=
      ",p_mg,mode,total_supply,total_demand,total_loss,est_total_mismatch,"
      "real_total_mismatch\n";

  for (const auto& rec : trace.records) {
    out += std::to_string(rec.round);
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_double(out, rec.agents[i].lambda_i);
    }
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_double(out, rec.agents[i].p_i);
    }
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_double(out, rec.agents[i].mismatch_est);
    }
    out += ',';
    append_double(out, rec.p_mg);
    out += ',' + std::to_string(rec.mode);
    out += ',';
    append_double(out, rec.total_supply);
    out += ',';
    append_double(out, rec.total_demand);
    out += ',';
    append_double(out, rec.total_loss);
    out += ',';
    append_double(out, rec.est_total_mismatch);
    out += ',';
    append_double(out, rec.real_total_mismatch);
    out += '\n';
  }
  return out;
}

std::string trace_to_json(const SimulationTrace& trace) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : trace.records) {
    nlohmann::json row;
    row["round"] = rec.round;
    auto lambda = nlohmann::json::array();
    auto p = nlohmann::json::array();
    auto est = nlohmann::json::array();
    for (const auto& a : rec.agents) {
      lambda.push_back(a.lambda_i);
      p.push_back(a.p_i);
      est.push_back(a.mismatch_est);
    }
    row["lambda"] = std::move(lambda);
    row["p"] = std::move(p);
    row["mismatch_est"] = std::move(est);
    row["p_mg"] = rec.p_mg;
    row["mode"] = rec.mode;
    row["price"] = rec.price;
    row["total_supply"] = rec.total_supply;
    row["total_demand"] = rec.total_demand;
    row["total_loss"] = rec.total_loss;
    row["est_total_mismatch"] = rec.est_total_mismatch;
    row["real_total_mismatch"] = rec.real_total_mismatch;
    row["events"] = rec.events;
    arr.push_back(std::move(row));
  }
  return arr.dump();
}

std::string trace_to_long_csv(const SimulationTrace& trace) {
  const int n = trace.n_icus;
  std::string out = "round,series,value\n";
  const auto emit = [&out](long round, const std::string& series, double v) {
    out += std::to_string(round);
    out += ',' + series + ',';
    append_double(out, v);
    out += '\n';
  };
  for (const auto& rec : trace.records) {
    for (int i = 0; i < n; ++i)
      emit(rec.round, "lambda_" + std::to_string(i + 1), rec.agents[i].lambda_i);
    for (int i = 0; i < n; ++i)
      emit(rec.round, "p_" + std::to_string(i + 1), rec.agents[i].p_i);
    for (int i = 0; i < n; ++i)
      emit(rec.round, "mismatch_est_" + std::to_string(i + 1),
           rec.agents[i].mismatch_est);
    emit(rec.round, "p_mg", rec.p_mg);
    out += std::to_string(rec.round) + ",mode," + std::to_string(rec.mode) + '\n';
    emit(rec.round, "total_supply", rec.total_supply);
    emit(rec.round, "total_demand", rec.total_demand);
    emit(rec.round, "total_loss", rec.total_loss);
    emit(rec.round, "est_total_mismatch", rec.est_total_mismatch);
    emit(rec.round, "real_total_mismatch", rec.real_total_mismatch);
  }
  return out;
}

nlohmann::json build_summary(const ScenarioConfig& cfg, const SimulationTrace& trace,
                             bool oracle_check) {
  nlohmann::json s;
  s["protocol"] = trace.protocol == Protocol::GridConnected ? "gc" : "int";
  s["n_icus"] = trace.n_icus;
  s["horizon"] = static_cast<long>(trace.records.size()) - 1;

  const auto converged = first_converged_round(trace, ConvergenceTolerances{});
  if (converged.has_value())
    s["converged_round"] = *converged;
  else
    s["converged_round"] = nullptr;

  double max_abs = 0.0, max_rel = 0.0;
  for (const auto& rec : trace.records) {
    const double gap = std::abs(rec.est_total_mismatch - rec.real_total_mismatch);
    max_abs = std::max(max_abs, gap);
    max_rel = std::max(max_rel, gap / (1.0 + std::abs(rec.real_total_mismatch)));
  }
  s["conservation"] = {{"max_abs_gap", max_abs}, {"max_rel_gap", max_rel}};

  const auto& last = trace.records.back();
  nlohmann::json fin;
  fin["round"] = last.round;
  auto lambda = nlohmann::json::array();
  auto p = nlohmann::json::array();
  for (const auto& a : last.agents) {
    lambda.push_back(a.lambda_i);
    p.push_back(a.p_i);
  }
  fin["lambda"] = std::move(lambda);
  fin["p"] = std::move(p);
  fin["p_mg"] = last.p_mg;
  fin["mode"] = last.mode;
  fin["price"] = last.price;
  s["final"] = std::move(fin);

  auto applied = nlohmann::json::array();
  for (const auto& rec : trace.records)
    for (const auto& marker : rec.events)
      applied.push_back({{"round", rec.round}, {"marker", marker}});
  s["events_applied"] = std::move(applied);

  if (oracle_check) {
    nlohmann::json oracle;
    const bool grid = last.mode != 0;
    oracle["mode"] = grid ? "grid" : "isolated";
    try {
      const auto sys = effective_system(cfg, last.round);
      const auto sol = grid ? solve_grid_connected(sys) : solve_isolated(sys);
      oracle["lambda_star"] = sol.lambda_star;
      auto p_star = nlohmann::json::array();
      for (double v : sol.p_star) p_star.push_back(v);
      oracle["p_star"] = std::move(p_star);
      oracle["p_mg_star"] = sol.p_mg_star;
      oracle["total_loss"] = sol.total_loss;
      oracle["total_cost"] = sol.total_cost;
      double lam_err = 0.0, p_err = 0.0;
      for (size_t i = 0; i < last.agents.size(); ++i) {
        lam_err = std::max(lam_err, std::abs(last.agents[i].lambda_i - sol.lambda_star));
        p_err = std::max(p_err, std::abs(last.agents[i].p_i - sol.p_star[i]));
      }
      oracle["max_lambda_error"] = lam_err;
      oracle["max_p_error"] = p_err;
      oracle["p_mg_error"] = std::abs(last.p_mg - sol.p_mg_star);
    } catch (const std::exception& e) {
      oracle["error"] = e.what();
    }
    s["oracle"] = std::move(oracle);
  }
  return s;
}

}  // namespace dispatchsim
