#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dispatchsim/dispatch.hpp"

namespace dispatchsim {

// Centralized ground-truth optimum used to validate the distributed runs.
struct DispatchSolution {
  double lambda_star = 0.0;        // common incremental cost (with penalty factor)
  std::vector<double> p_star;      // optimal generation per bus
  double p_mg_star = 0.0;          // power drawn from the distribution system; 0 islanded
  std::vector<int> active_upper;   // 0-based buses clamped at p_max
  std::vector<int> active_lower;   // 0-based buses clamped at p_min
  double total_loss = 0.0;
  double total_cost = 0.0;         // includes lambda0 * p_mg only when grid-connected
};

// Isolated solve failures. NoRoot: the islanded balance cannot be met inside
// the limits. AmbiguousRoot: the monotonicity precondition p_max < 1/(2B)
// fails for some bus, so the scalar residual may not cross zero uniquely.
class NoRootError : public std::runtime_error {
 public:
  explicit NoRootError(const std::string& what) : std::runtime_error(what) {}
};
class AmbiguousRootError : public std::runtime_error {
 public:
  explicit AmbiguousRootError(const std::string& what) : std::runtime_error(what) {}
};

// Grid-connected: every bus dispatches at the broadcast price, the ER covers
// the remainder. Always feasible.
DispatchSolution solve_grid_connected(const SystemParams& sys);

// Islanded: finds the unique price at which supply net of losses meets total
// demand, by bisection on the monotone residual
//   r(lambda) = sum_i [ phi_i(lambda) - B_i phi_i(lambda)^2 ] - sum_i demand_i.
// Throws NoRootError / AmbiguousRootError (see above).
DispatchSolution solve_isolated(const SystemParams& sys);

// First-order optimality audit: per-bus stationarity of the loss-adjusted
// incremental cost on unclamped buses, supply-demand balance, and the clamp
// sign conditions. Failures are report entries, never exceptions.
struct KktCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst residual seen for this condition
  std::string detail;
};
struct KktReport {
  bool pass = false;
  std::vector<KktCheck> checks;
};
KktReport verify_kkt(const SystemParams& sys, const DispatchSolution& sol, bool isolated);

}  // namespace dispatchsim
