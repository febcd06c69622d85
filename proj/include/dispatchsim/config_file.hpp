#pragma once

#include <stdexcept>
#include <string>

#include "dispatchsim/scenario.hpp"

namespace dispatchsim {

// Scenario files are a small line-oriented key-value tree; see README for the
// full schema. Sketch:
//
//   horizon = 600
//   protocol { kind = gc   eps = 0.1   mu = 0.1 }
//   system {
//     lambda0 = 85.0
//     generator g1 { alpha = -7830.11  beta = 93.81  gamma = -326572
//                    p_min = 50  p_max = 200  loss_b = 0.00021  demand = 50 }
//   }
//   graph {
//     edge 1 <-> 2 : 1.0      # arrows follow information flow; <-> adds both
//     er_to = 1 2             # ER broadcasts to these buses
//     er_from = 1             # these buses report to the ER
//   }
//   events { at 200 outage_dg 4 }
//   init { lambda = 0 0  mode = 1 }
//
// Parse errors carry file:line positions.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

ScenarioConfig parse_scenario_text(const std::string& text,
                                   const std::string& source_name = "<string>");
ScenarioConfig parse_scenario_file(const std::string& path);

}  // namespace dispatchsim
