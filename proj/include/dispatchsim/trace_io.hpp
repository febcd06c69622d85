#pragma once

#include <string>

#include <json.hpp>

#include "dispatchsim/scenario.hpp"

namespace dispatchsim {

// Wide CSV, one row per round. Column order is stable and covered by a
// golden-file test:
//   round, lambda_1..N, p_1..N, mismatch_est_1..N, p_mg, mode,
//   total_supply, total_demand, total_loss, est_total_mismatch,
//   real_total_mismatch
// Doubles are serialized with shortest round-trip formatting, so identical
// runs yield byte-identical files.
std::string trace_to_csv(const SimulationTrace& trace);

// Same records as an array of per-round JSON objects.
std::string trace_to_json(const SimulationTrace& trace);

// Long/tidy format for plotting tools: round,series,value.
std::string trace_to_long_csv(const SimulationTrace& trace);

// Run summary: final state, convergence round (when the detector fires),
// conservation quality, and optionally the comparison against the
// mode-appropriate centralized optimum.
nlohmann::json build_summary(const ScenarioConfig& cfg, const SimulationTrace& trace,
                             bool oracle_check);

}  // namespace dispatchsim
