#include "dispatchsim/engine.hpp"

#include <cmath>
#include <stdexcept>

namespace dispatchsim {

double SigmaSchedule::operator()(long k) const {
  return scale / std::pow(1.0 + static_cast<double>(k), exponent);
}

void SigmaSchedule::validate() const {
  if (!std::isfinite(scale) || scale <= 0.0)
    throw std::invalid_argument("sigma schedule: scale must be finite and > 0");
  if (!std::isfinite(exponent) || exponent <= 0.0 || exponent > 1.0)
    throw std::invalid_argument("sigma schedule: exponent must lie in (0, 1]");
}

std::pair<std::vector<AgentState>, ErState> gc_round(
    const std::vector<AgentState>& agents, const ErState& er,
    const GridGraph& g, const SystemParams& sys, const ProtocolConfig& cfg) {
  const int n = g.n_icus();
  const auto& adj = g.icu_adjacency;
  std::vector<AgentState> next(n);
  ErState er_next = er;

  double reported = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& gp = sys.generators[i];
    const AgentState& s = agents[i];
    AgentState& t = next[i];

    double lam_acc = 0.0;
    double est_acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = adj(i, j);
      if (a == 0.0) continue;
      lam_acc += a * (agents[j].lambda_i - s.lambda_i);
      est_acc += a * (agents[j].mismatch_est - s.mismatch_est);
    }

    t.lambda_i = s.lambda_i +
                 cfg.eps[i] * (lam_acc + g.er_to_icu[i] * (er.price - s.lambda_i));
    t.p_i = project_power(gp, t.lambda_i);
    t.delta_p_prev = bus_mismatch(gp, t.p_i);
    t.y_i = s.mismatch_est + cfg.mu * est_acc + t.delta_p_prev - s.delta_p_prev;
    // Reporting buses hand their consensus value to the ER and restart at an
    // exact (positive) zero; er weights are validated to be exactly 0 or 1.
    t.mismatch_est = g.icu_to_er[i] == 1.0 ? 0.0 : t.y_i;
    t.p_mi = 0.0;
    reported += g.icu_to_er[i] * t.y_i;
  }

  er_next.p_mg = er.p_mg + reported;
  return {std::move(next), er_next};
}

std::pair<std::vector<AgentState>, ErState> int_round(
    const std::vector<AgentState>& agents, const ErState& er,
    const GridGraph& g, const SystemParams& sys, const ProtocolConfig& cfg,
    long k) {
  const int n = g.n_icus();
  const auto& adj = g.icu_adjacency;
  const double gate = er.mode != 0 ? 1.0 : 0.0;
  const double gain = cfg.sigma(k);
  std::vector<AgentState> next(n);
  ErState er_next = er;

  double exchanged = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& gp = sys.generators[i];
    const AgentState& s = agents[i];
    AgentState& t = next[i];

    double lam_acc = 0.0;
    double est_acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = adj(i, j);
      if (a == 0.0) continue;
      lam_acc += a * (agents[j].lambda_i - s.lambda_i);
      est_acc += a * (agents[j].mismatch_est - s.mismatch_est);
    }

    // Islanded, the leader pull gates off and the vanishing mismatch feedback
    // drives the local price instead.
    t.lambda_i =
        s.lambda_i +
        cfg.eps[i] * (lam_acc + gate * g.er_to_icu[i] * (er.price - s.lambda_i)) +
        gain * s.mismatch_est;
    t.p_i = project_power(gp, t.lambda_i);
    t.delta_p_prev = bus_mismatch(gp, t.p_i);
    t.y_i = s.mismatch_est + cfg.mu * est_acc + t.delta_p_prev - s.delta_p_prev;

    // A bidirectional ER neighbor trades away its consensus value; switching
    // to island mode trades the running total back so nothing is lost.
    const double traded = gate * g.icu_to_er[i] * t.y_i;
    t.p_mi = gate * (s.p_mi + g.er_to_icu[i] * traded);
    t.mismatch_est = t.y_i + g.er_to_icu[i] * (s.p_mi - t.p_mi);
    exchanged += t.p_mi;
  }

  er_next.p_mg = exchanged;
  return {std::move(next), er_next};
}

std::pair<std::vector<AgentState>, ErState> initial_state(
    const GridGraph& g, const SystemParams& sys,
    const std::vector<double>& lambda0_overrides, int mode) {
  const int n = g.n_icus();
  if (!lambda0_overrides.empty() &&
      static_cast<int>(lambda0_overrides.size()) != n)
    throw std::invalid_argument(
        "initial lambda overrides must match the bus count");

  std::vector<AgentState> agents(n);
  for (int i = 0; i < n; ++i) {
    AgentState& a = agents[i];
    a.lambda_i = lambda0_overrides.empty() ? 0.0 : lambda0_overrides[i];
    a.p_i = project_power(sys.generators[i], a.lambda_i);
    a.delta_p_prev = bus_mismatch(sys.generators[i], a.p_i);
    a.mismatch_est = a.delta_p_prev;
    a.y_i = 0.0;
    a.p_mi = 0.0;
  }

  ErState er;
  er.p_mg = 0.0;
  er.price = sys.price_lambda0;
  er.mode = mode;
  return {std::move(agents), er};
}

}  // namespace dispatchsim
