#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispatchsim/engine.hpp"

namespace dispatchsim {

enum class Protocol { GridConnected, Integrated };

enum class EventKind { SetMode, OutageDg, ReconnectDg, SetPrice, SetDemand };

// A scheduled change. Events fire immediately before the round with the
// matching index: "switch at 250" means round 250 is computed under the new
// mode. bus is 0-based; value carries g / price / MW depending on kind.
struct Event {
  long round = 0;
  EventKind kind = EventKind::SetMode;
  int bus = -1;
  double value = 0.0;
};

struct ScenarioConfig {
  SystemParams system;
  GridGraph graph;
  Protocol protocol = Protocol::GridConnected;
  ProtocolConfig protocol_cfg;
  long horizon = 0;
  std::vector<Event> events;            // rounds must lie in [1, horizon]
  std::vector<double> initial_lambda;   // empty = all zeros
  int initial_mode = 1;                 // integrated protocol may start islanded
};

// One row per round, 0..horizon. Aggregates are recomputed from the agent
// fields every round; est vs real total mismatch is the conservation pair
// (they agree to rounding whenever the ICU graph is weight-balanced).
struct TraceRecord {
  long round = 0;
  std::vector<AgentState> agents;
  double p_mg = 0.0;
  int mode = 1;
  double price = 0.0;
  double total_supply = 0.0;
  double total_demand = 0.0;
  double total_loss = 0.0;
  double est_total_mismatch = 0.0;   // sum of mismatch estimates
  double real_total_mismatch = 0.0;  // sum of actual mismatches minus ER exchange
  std::vector<std::string> events;   // markers applied just before this round
};

struct SimulationTrace {
  int n_icus = 0;
  Protocol protocol = Protocol::GridConnected;
  std::vector<TraceRecord> records;
};

// Validation: structural graph checks, the protocol's assumptions (reach
// checks, step-size bounds, sigma schedule), the stability radius with the
// protocol-appropriate absorption matrix, and the islanded-feasibility
// warning where the scenario can enter island mode. hard=false items are
// warnings; run() refuses only hard failures.
struct ValidationItem {
  std::string name;
  bool pass = false;
  bool hard = true;
  std::string detail;
};
struct ValidationReport {
  bool ok = false;  // no hard failures
  std::vector<ValidationItem> items;
};

ValidationReport validate(const ScenarioConfig& cfg);

class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

// Runs the configured protocol for horizon rounds and records everything.
// Deterministic: identical config => bit-identical trace. Throws
// ValidationError when validate() reports a hard failure, SimulationError on
// non-finite state (diagnostic names the round).
SimulationTrace run(const ScenarioConfig& cfg);

// Plant parameters in force at at_round: the base system with every event of
// round <= at_round replayed (demand changes, outage/reconnect limit edits,
// broadcast-price changes). Lets callers solve the matching optimum for any
// point of the schedule.
SystemParams effective_system(const ScenarioConfig& cfg, long at_round);

// True when the window ending at at_round satisfies the tolerances and
// contains no event. Requires at_round >= window size.
bool detect_convergence(const SimulationTrace& trace, long at_round,
                        const ConvergenceTolerances& tol);

// Earliest round at which detect_convergence fires; nullopt when it never
// does within the trace.
std::optional<long> first_converged_round(const SimulationTrace& trace,
                                          const ConvergenceTolerances& tol);

}  // namespace dispatchsim
