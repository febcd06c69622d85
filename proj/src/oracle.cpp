#include "dispatchsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dispatchsim {

namespace {

// Loss-adjusted incremental cost at power p; the inverse of the unclamped
// projection. Only meaningful on the physical branch 2*B*p < 1.
double incremental_cost(const GeneratorParams& gp, double p) {
  return (p - gp.alpha) / (gp.beta * (1.0 - 2.0 * gp.loss_factor * p));
}

// Unclamped stationary power at price lambda (projection before limits).
double unclamped_power(const GeneratorParams& gp, double lambda) {
  const double num = gp.beta * lambda + gp.alpha;
  const double den = 1.0 + 2.0 * gp.loss_factor * gp.beta * lambda;
  if (den == 0.0)
    return num > 0.0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
  return num / den;
}

// Net power a bus feeds into the island at price lambda.
double net_supply(const GeneratorParams& gp, double lambda) {
  const double p = project_power(gp, lambda);
  return p - gp.loss_factor * p * p;
}

void classify_actives(const SystemParams& sys, DispatchSolution& sol) {
  for (int i = 0; i < sys.size(); ++i) {
    const auto& gp = sys.generators[i];
    const double u = unclamped_power(gp, sol.lambda_star);
    if (u > gp.p_max)
      sol.active_upper.push_back(i);
    else if (u < gp.p_min)
      sol.active_lower.push_back(i);
  }
}

void fill_totals(const SystemParams& sys, DispatchSolution& sol) {
  sol.total_loss = 0.0;
  sol.total_cost = 0.0;
  for (int i = 0; i < sys.size(); ++i) {
    sol.total_loss += line_loss(sys.generators[i], sol.p_star[i]);
    sol.total_cost += cost(sys.generators[i], sol.p_star[i]);
  }
}

}  // namespace

DispatchSolution solve_grid_connected(const SystemParams& sys) {
  sys.validate();
  DispatchSolution sol;
  sol.lambda_star = sys.price_lambda0;
  sol.p_star.resize(sys.size());
  sol.p_mg_star = 0.0;
  for (int i = 0; i < sys.size(); ++i) {
    const auto& gp = sys.generators[i];
    sol.p_star[i] = project_power(gp, sol.lambda_star);
    sol.p_mg_star += bus_mismatch(gp, sol.p_star[i]);
  }
  classify_actives(sys, sol);
  fill_totals(sys, sol);
  sol.total_cost += sys.price_lambda0 * sol.p_mg_star;
  return sol;
}

DispatchSolution solve_isolated(const SystemParams& sys) {
  sys.validate();

  double total_demand = 0.0;
  for (const auto& gp : sys.generators) total_demand += gp.demand;

  // Monotonicity precondition: net supply p - B p^2 must be increasing up to
  // p_max on every bus, i.e. p_max strictly below the parabola peak 1/(2B).
  for (int i = 0; i < sys.size(); ++i) {
    const auto& gp = sys.generators[i];
    if (gp.loss_factor > 0.0 && 2.0 * gp.loss_factor * gp.p_max >= 1.0)
      throw AmbiguousRootError(
          "bus " + std::to_string(i + 1) + ": p_max " + std::to_string(gp.p_max) +
          " reaches the net-supply peak 1/(2*loss_b) = " +
          std::to_string(1.0 / (2.0 * gp.loss_factor)) +
          "; the balance residual may recross and the root is not unique");
  }

  const auto residual = [&](double lambda) {
    double r = -total_demand;
    for (const auto& gp : sys.generators) r += net_supply(gp, lambda);
    return r;
  };

  // Bracket from the per-bus prices at which each unit sits exactly on a
  // limit; outside [lo, hi] every unit is pinned, so the residual is flat.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& gp : sys.generators) {
    lo = std::min(lo, incremental_cost(gp, gp.p_min));
    hi = std::max(hi, incremental_cost(gp, gp.p_max));
  }

  if (residual(lo) > 0.0)
    throw NoRootError(
        "total demand " + std::to_string(total_demand) +
        " MW sits below the islanded minimum net supply; no balancing price");
  if (residual(hi) < 0.0)
    throw NoRootError(
        "total demand " + std::to_string(total_demand) +
        " MW exceeds the islanded maximum net supply; no balancing price");

  while (hi - lo > 1e-11) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }

  DispatchSolution sol;
  sol.lambda_star = 0.5 * (lo + hi);
  sol.p_star.resize(sys.size());
  for (int i = 0; i < sys.size(); ++i)
    sol.p_star[i] = project_power(sys.generators[i], sol.lambda_star);
  sol.p_mg_star = 0.0;
  classify_actives(sys, sol);
  fill_totals(sys, sol);
  return sol;
}

KktReport verify_kkt(const SystemParams& sys, const DispatchSolution& sol,
                     bool isolated) {
  KktReport report;
  const int n = sys.size();
  const double lam_tol = 1e-6 * (1.0 + std::abs(sol.lambda_star));

  const auto in = [](const std::vector<int>& v, int i) {
    return std::find(v.begin(), v.end(), i) != v.end();
  };

  // 1. stationarity: unclamped buses run at the common incremental cost
  KktCheck stat{"stationarity", true, 0.0, ""};
  for (int i = 0; i < n; ++i) {
    const auto& gp = sys.generators[i];
    if (in(sol.active_upper, i) || in(sol.active_lower, i)) continue;
    if (gp.p_min == gp.p_max) continue;  // no interior to be stationary on
    const double r = std::abs(incremental_cost(gp, sol.p_star[i]) - sol.lambda_star);
    if (r > stat.worst) {
      stat.worst = r;
      stat.detail = "bus " + std::to_string(i + 1);
    }
  }
  stat.pass = stat.worst <= lam_tol;
  report.checks.push_back(stat);

  // 2. balance: demand + losses == generation + ER exchange
  KktCheck bal{"balance", true, 0.0, ""};
  double lhs = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& gp = sys.generators[i];
    lhs += gp.demand + line_loss(gp, sol.p_star[i]) - sol.p_star[i];
  }
  bal.worst = std::abs(lhs - (isolated ? 0.0 : sol.p_mg_star));
  bal.pass = bal.worst <= 1e-6;
  report.checks.push_back(bal);

  // 3/4. clamp sign conditions: a clamped bus must want to move past its limit
  KktCheck upper{"upper-clamp", true, 0.0, ""};
  for (int i : sol.active_upper) {
    const auto& gp = sys.generators[i];
    const double member = std::abs(sol.p_star[i] - gp.p_max);
    const double slack =
        std::max(0.0, gp.p_max - unclamped_power(gp, sol.lambda_star));
    if (member > 1e-9 * (1.0 + std::abs(gp.p_max)) ||
        slack > 1e-6 * (1.0 + std::abs(gp.p_max))) {
      upper.pass = false;
      upper.detail = "bus " + std::to_string(i + 1);
    }
    upper.worst = std::max({upper.worst, member, slack});
  }
  report.checks.push_back(upper);

  KktCheck lower{"lower-clamp", true, 0.0, ""};
  for (int i : sol.active_lower) {
    const auto& gp = sys.generators[i];
    const double member = std::abs(sol.p_star[i] - gp.p_min);
    const double slack =
        std::max(0.0, unclamped_power(gp, sol.lambda_star) - gp.p_min);
    if (member > 1e-9 * (1.0 + std::abs(gp.p_min)) ||
        slack > 1e-6 * (1.0 + std::abs(gp.p_min))) {
      lower.pass = false;
      lower.detail = "bus " + std::to_string(i + 1);
    }
    lower.worst = std::max({lower.worst, member, slack});
  }
  report.checks.push_back(lower);

  // 5. active-set bookkeeping: valid indices, no double listing
  KktCheck sets{"active-sets", true, 0.0, ""};
  for (int i : sol.active_upper)
    if (i < 0 || i >= n) sets.pass = false;
  for (int i : sol.active_lower) {
    if (i < 0 || i >= n) sets.pass = false;
    if (in(sol.active_upper, i) &&
        sys.generators[i].p_min != sys.generators[i].p_max)
      sets.pass = false;
  }
  if (!sets.pass) sets.detail = "inconsistent clamp lists";
  report.checks.push_back(sets);

  report.pass = true;
  for (const auto& c : report.checks) report.pass = report.pass && c.pass;
  return report;
}

}  // namespace dispatchsim
