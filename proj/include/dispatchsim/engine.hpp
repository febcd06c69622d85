#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "dispatchsim/dispatch.hpp"
#include "dispatchsim/grid_graph.hpp"

namespace dispatchsim {

// Per-bus iteration state at one synchronous round k. A round update reads
// only round-k state (own fields, in-neighbors' fields, ER broadcast) and
// writes round k+1 -- double buffering keeps runs bit-reproducible.
struct AgentState {
  double lambda_i = 0.0;      // local price estimate
  double p_i = 0.0;           // dispatched power, always the projection of lambda_i
  double mismatch_est = 0.0;  // local estimate of the average power mismatch
  double y_i = 0.0;           // intermediate consensus value of the mismatch pass
  double p_mi = 0.0;          // cumulative power exchanged via the ER, credited here
  double delta_p_prev = 0.0;  // this round's actual bus mismatch, cached for the
                              // next round's increment term
};

// Energy-router state. mode is the g switch: 1 grid-connected, 0 islanded.
struct ErState {
  double p_mg = 0.0;   // total power drawn from the distribution system
  double price = 0.0;  // broadcast price
  int mode = 1;
};

// Vanishing feedback gain for the integrated protocol: scale / (1+k)^exponent.
// Requires scale > 0 and exponent in (0, 1] so the gain decays to zero while
// its series diverges (the integrated protocol's convergence needs both).
struct SigmaSchedule {
  double scale = 1.0;
  double exponent = 1.0;

  double operator()(long k) const;
  void validate() const;  // throws std::invalid_argument
};

struct ProtocolConfig {
  Eigen::VectorXd eps;   // per-bus price step sizes
  double mu = 0.0;       // mismatch-consensus step size
  SigmaSchedule sigma;   // integrated protocol only
};

// One synchronous round of the grid-connected protocol (g fixed at 1):
// price consensus toward the broadcast price, projection, mismatch-average
// consensus with the increment term, absorption at reporting buses, and the
// ER's running total.
std::pair<std::vector<AgentState>, ErState> gc_round(
    const std::vector<AgentState>& agents, const ErState& er,
    const GridGraph& g, const SystemParams& sys, const ProtocolConfig& cfg);

// One synchronous round of the integrated protocol. k is the index of the
// round being read (the feedback gain is sigma(k)). er.mode is read as-is;
// scenario events flip it between rounds. On a grid->island switch the
// correction term hands each bidirectional ER neighbor its accumulated
// exchange back, so the island still sees the true total mismatch.
std::pair<std::vector<AgentState>, ErState> int_round(
    const std::vector<AgentState>& agents, const ErState& er,
    const GridGraph& g, const SystemParams& sys, const ProtocolConfig& cfg,
    long k);

// Round-0 state: lambda as given (zeros by default), power projected from it,
// mismatch estimates seeded with the actual mismatches, everything else zero.
std::pair<std::vector<AgentState>, ErState> initial_state(
    const GridGraph& g, const SystemParams& sys,
    const std::vector<double>& lambda0_overrides, int mode);

// Convergence detection over a trailing trace window: per-round price and
// ER-exchange deltas plus the mismatch estimates must all sit below the
// tolerances for a full window, with no event inside it.
struct ConvergenceTolerances {
  double lambda_step = 1e-6;
  double mismatch_abs = 1e-4;
  double er_step = 1e-4;
  int window = 50;
};

}  // namespace dispatchsim
