#include "dispatchsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <utility>

namespace dispatchsim {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<Event> sorted_events(const std::vector<Event>& events) {
  std::vector<Event> out = events;
  std::stable_sort(out.begin(), out.end(),
                   [](const Event& a, const Event& b) { return a.round < b.round; });
  return out;
}

// Mutable pieces of the world an event can touch.
struct LiveState {
  SystemParams* sys = nullptr;
  ErState* er = nullptr;  // may be null for dry replays
  std::vector<std::pair<double, double>>* saved_limits = nullptr;
};

std::string apply_event(const Event& e, LiveState live) {
  auto& gens = live.sys->generators;
  switch (e.kind) {
    case EventKind::SetMode:
      if (live.er != nullptr) live.er->mode = static_cast<int>(e.value);
      return "set_mode " + fmt_double(e.value);
    case EventKind::SetPrice:
      live.sys->price_lambda0 = e.value;
      if (live.er != nullptr) live.er->price = e.value;
      return "set_price " + fmt_double(e.value);
    case EventKind::SetDemand:
      gens[e.bus].demand = e.value;
      return "set_demand " + std::to_string(e.bus + 1) + " " + fmt_double(e.value);
    case EventKind::OutageDg:
      (*live.saved_limits)[e.bus] = {gens[e.bus].p_min, gens[e.bus].p_max};
      gens[e.bus].p_min = 0.0;
      gens[e.bus].p_max = 0.0;
      return "outage_dg " + std::to_string(e.bus + 1);
    case EventKind::ReconnectDg:
      gens[e.bus].p_min = (*live.saved_limits)[e.bus].first;
      gens[e.bus].p_max = (*live.saved_limits)[e.bus].second;
      return "reconnect_dg " + std::to_string(e.bus + 1);
  }
  return "";
}

TraceRecord make_record(long round, const std::vector<AgentState>& agents,
                        const ErState& er, const SystemParams& sys,
                        std::vector<std::string> markers) {
  TraceRecord rec;
  rec.round = round;
  rec.agents = agents;
  rec.p_mg = er.p_mg;
  rec.mode = er.mode;
  rec.price = er.price;
  rec.events = std::move(markers);
  for (int i = 0; i < sys.size(); ++i) {
    const auto& gp = sys.generators[i];
    rec.total_supply += agents[i].p_i;
    rec.total_demand += gp.demand;
    rec.total_loss += line_loss(gp, agents[i].p_i);
    rec.est_total_mismatch += agents[i].mismatch_est;
    rec.real_total_mismatch += bus_mismatch(gp, agents[i].p_i);
  }
  rec.real_total_mismatch -= rec.p_mg;
  return rec;
}

// Returns the name of the first non-finite stored field, empty when clean.
std::string first_non_finite(const TraceRecord& rec) {
  for (size_t i = 0; i < rec.agents.size(); ++i) {
    const auto& a = rec.agents[i];
    const std::string bus = "bus " + std::to_string(i + 1) + " ";
    if (!std::isfinite(a.lambda_i)) return bus + "lambda";
    if (!std::isfinite(a.p_i)) return bus + "power";
    if (!std::isfinite(a.mismatch_est)) return bus + "mismatch estimate";
    if (!std::isfinite(a.y_i)) return bus + "consensus intermediate";
    if (!std::isfinite(a.p_mi)) return bus + "exchange credit";
    if (!std::isfinite(a.delta_p_prev)) return bus + "cached mismatch";
  }
  if (!std::isfinite(rec.p_mg)) return "er exchange total";
  if (!std::isfinite(rec.price)) return "broadcast price";
  if (!std::isfinite(rec.total_supply)) return "total_supply";
  if (!std::isfinite(rec.total_demand)) return "total_demand";
  if (!std::isfinite(rec.total_loss)) return "total_loss";
  if (!std::isfinite(rec.est_total_mismatch)) return "est_total_mismatch";
  if (!std::isfinite(rec.real_total_mismatch)) return "real_total_mismatch";
  return "";
}

void push(ValidationReport& report, std::string name, bool pass, bool hard,
          std::string detail) {
  report.items.push_back({std::move(name), pass, hard, std::move(detail)});
}

}  // namespace

ValidationReport validate(const ScenarioConfig& cfg) {
  ValidationReport report;
  const int n = cfg.system.size();

  // plant parameters
  try {
    cfg.system.validate();
    push(report, "system-params", true, true, "");
  } catch (const std::invalid_argument& e) {
    push(report, "system-params", false, true, e.what());
  }

  push(report, "horizon", cfg.horizon >= 0, true,
       cfg.horizon >= 0 ? "" : "horizon must be >= 0");

  // graph structure, and its size against the plant
  bool graph_ok = false;
  try {
    cfg.graph.validate();
    if (cfg.graph.n_icus() != n)
      push(report, "graph", false, true,
           "graph has " + std::to_string(cfg.graph.n_icus()) + " buses, system has " +
               std::to_string(n));
    else {
      graph_ok = true;
      push(report, "graph", true, true, "");
    }
  } catch (const std::invalid_argument& e) {
    push(report, "graph", false, true, e.what());
  }

  // initial conditions
  if (cfg.protocol == Protocol::GridConnected)
    push(report, "initial-mode", cfg.initial_mode == 1, true,
         cfg.initial_mode == 1
             ? ""
             : "the grid-connected protocol has no island mode; initial mode must be 1");
  else
    push(report, "initial-mode", cfg.initial_mode == 0 || cfg.initial_mode == 1, true,
         "initial mode must be 0 (islanded) or 1 (grid-connected)");

  {
    bool ok = cfg.initial_lambda.empty() ||
              static_cast<int>(cfg.initial_lambda.size()) == n;
    for (double v : cfg.initial_lambda) ok = ok && std::isfinite(v);
    push(report, "initial-lambda", ok, true,
         ok ? "" : "initial prices must be empty or give one finite value per bus");
  }

  if (graph_ok) {
    push(report, "price-reachability", check_spanning_tree_from_er(cfg.graph), true,
         check_spanning_tree_from_er(cfg.graph)
             ? ""
             : "some bus never hears the broadcast price, directly or via neighbors");
    push(report, "mismatch-reachability", check_paths_to_er(cfg.graph), true,
         check_paths_to_er(cfg.graph)
             ? ""
             : "some bus's mismatch estimate can never reach a reporting bus");
    if (cfg.protocol == Protocol::Integrated)
      push(report, "er-bidirectional", check_bidirectional_er_neighbor(cfg.graph), true,
           check_bidirectional_er_neighbor(cfg.graph)
               ? ""
               : "the integrated protocol needs a two-way ER attachment on a "
                 "connected bus network");

    const auto bounds = step_size_bounds(cfg.graph);
    const auto& eps = cfg.protocol_cfg.eps;
    bool eps_ok = eps.size() == n;
    bool eps_strict = eps_ok;
    std::string eps_detail;
    if (!eps_ok) {
      eps_detail = "expected " + std::to_string(n) + " price step sizes, got " +
                   std::to_string(static_cast<int>(eps.size()));
    } else {
      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(eps[i]) || eps[i] <= 0.0 || eps[i] > bounds.eps_max[i]) {
          eps_ok = false;
          eps_detail = "bus " + std::to_string(i + 1) + ": eps " + fmt_double(eps[i]) +
                       " outside (0, " + fmt_double(bounds.eps_max[i]) + "]";
          break;
        }
        eps_strict = eps_strict && eps[i] < bounds.eps_max[i];
      }
    }
    push(report, "eps-bound", eps_ok, true, eps_detail);

    const double mu = cfg.protocol_cfg.mu;
    const bool mu_ok = std::isfinite(mu) && mu > 0.0 && mu <= bounds.mu_max;
    push(report, "mu-bound", mu_ok, true,
         mu_ok ? ""
               : "mu " + fmt_double(mu) + " outside (0, " + fmt_double(bounds.mu_max) +
                     "]");

    const bool margin = eps_ok && mu_ok && eps_strict && mu < bounds.mu_max;
    push(report, "step-size-margin", margin, false,
         margin ? ""
                : "a step size sits exactly on its stability bound; convergence "
                  "is not guaranteed there");

    try {
      const auto kind = cfg.protocol == Protocol::GridConnected
                            ? AbsorptionKind::Reporters
                            : AbsorptionKind::Bidirectional;
      const auto sc = absorption_spectral_check(cfg.graph, mu, kind);
      push(report, "spectral-radius", sc.stable, true,
           "radius " + fmt_double(sc.radius) + " (must stay below 1)");
    } catch (const std::invalid_argument& e) {
      push(report, "spectral-radius", false, true, e.what());
    }
  }

  if (cfg.protocol == Protocol::Integrated) {
    try {
      cfg.protocol_cfg.sigma.validate();
      push(report, "sigma-schedule", true, true, "");
    } catch (const std::invalid_argument& e) {
      push(report, "sigma-schedule", false, true, e.what());
    }
  }

  {
    bool ok = true;
    std::string detail;
    for (const auto& e : cfg.events) {
      if (e.round < 1 || e.round > cfg.horizon) {
        ok = false;
        detail = "event at round " + std::to_string(e.round) + " outside [1, " +
                 std::to_string(cfg.horizon) + "]";
        break;
      }
      const bool needs_bus = e.kind == EventKind::OutageDg ||
                             e.kind == EventKind::ReconnectDg ||
                             e.kind == EventKind::SetDemand;
      if (needs_bus && (e.bus < 0 || e.bus >= n)) {
        ok = false;
        detail = "event at round " + std::to_string(e.round) + " targets bus " +
                 std::to_string(e.bus + 1) + ", but there are " + std::to_string(n) +
                 " buses";
        break;
      }
      if (e.kind == EventKind::SetMode) {
        if (cfg.protocol == Protocol::GridConnected) {
          ok = false;
          detail = "mode switches need the integrated protocol";
          break;
        }
        if (e.value != 0.0 && e.value != 1.0) {
          ok = false;
          detail = "mode must switch to 0 or 1";
          break;
        }
      }
      if (e.kind == EventKind::SetDemand &&
          (!std::isfinite(e.value) || e.value < 0.0)) {
        ok = false;
        detail = "demand must be finite and >= 0";
        break;
      }
      if (e.kind == EventKind::SetPrice && !std::isfinite(e.value)) {
        ok = false;
        detail = "price must be finite";
        break;
      }
    }
    push(report, "events", ok, true, detail);
  }

  // Only meaningful when the run can actually island.
  const bool can_island =
      cfg.protocol == Protocol::Integrated &&
      (cfg.initial_mode == 0 ||
       std::any_of(cfg.events.begin(), cfg.events.end(), [](const Event& e) {
         return e.kind == EventKind::SetMode && e.value == 0.0;
       }));
  if (can_island) {
    const auto warning = cfg.system.isolated_feasibility_warning();
    push(report, "islanded-feasibility", !warning.has_value(), false,
         warning.value_or(""));
  }

  report.ok = true;
  for (const auto& it : report.items)
    if (it.hard && !it.pass) report.ok = false;
  return report;
}

SimulationTrace run(const ScenarioConfig& cfg) {
  const auto report = validate(cfg);
  if (!report.ok) {
    std::string msg = "scenario failed validation";
    for (const auto& it : report.items) {
      if (it.hard && !it.pass) {
        msg += ": " + it.name + (it.detail.empty() ? "" : " (" + it.detail + ")");
        break;
      }
    }
    throw ValidationError(msg);
  }

  const int n = cfg.system.size();
  SystemParams sys = cfg.system;
  std::vector<std::pair<double, double>> saved_limits(n);
  for (int i = 0; i < n; ++i)
    saved_limits[i] = {sys.generators[i].p_min, sys.generators[i].p_max};

  auto [agents, er] = initial_state(cfg.graph, sys, cfg.initial_lambda,
                                    cfg.protocol == Protocol::Integrated
                                        ? cfg.initial_mode
                                        : 1);

  SimulationTrace trace;
  trace.n_icus = n;
  trace.protocol = cfg.protocol;
  trace.records.reserve(static_cast<size_t>(cfg.horizon) + 1);
  trace.records.push_back(make_record(0, agents, er, sys, {}));

  const auto events = sorted_events(cfg.events);
  size_t next_event = 0;
  for (long r = 1; r <= cfg.horizon; ++r) {
    std::vector<std::string> markers;
    while (next_event < events.size() && events[next_event].round == r) {
      markers.push_back(
          apply_event(events[next_event], {&sys, &er, &saved_limits}));
      ++next_event;
    }

    auto [next_agents, next_er] =
        cfg.protocol == Protocol::GridConnected
            ? gc_round(agents, er, cfg.graph, sys, cfg.protocol_cfg)
            : int_round(agents, er, cfg.graph, sys, cfg.protocol_cfg, r - 1);
    agents = std::move(next_agents);
    er = next_er;

    trace.records.push_back(make_record(r, agents, er, sys, std::move(markers)));
    const std::string bad = first_non_finite(trace.records.back());
    if (!bad.empty())
      throw SimulationError("non-finite " + bad + " at round " + std::to_string(r));
  }
  return trace;
}

SystemParams effective_system(const ScenarioConfig& cfg, long at_round) {
  SystemParams sys = cfg.system;
  const int n = sys.size();
  std::vector<std::pair<double, double>> saved_limits(n);
  for (int i = 0; i < n; ++i)
    saved_limits[i] = {sys.generators[i].p_min, sys.generators[i].p_max};
  for (const auto& e : sorted_events(cfg.events))
    if (e.round <= at_round) apply_event(e, {&sys, nullptr, &saved_limits});
  return sys;
}

bool detect_convergence(const SimulationTrace& trace, long at_round,
                        const ConvergenceTolerances& tol) {
  if (at_round < tol.window) return false;
  if (at_round >= static_cast<long>(trace.records.size())) return false;
  for (long r = at_round - tol.window + 1; r <= at_round; ++r) {
    const auto& cur = trace.records[r];
    const auto& prev = trace.records[r - 1];
    if (!cur.events.empty()) return false;
    if (std::abs(cur.p_mg - prev.p_mg) > tol.er_step) return false;
    for (size_t i = 0; i < cur.agents.size(); ++i) {
      if (std::abs(cur.agents[i].lambda_i - prev.agents[i].lambda_i) >
          tol.lambda_step)
        return false;
      if (std::abs(cur.agents[i].mismatch_est) > tol.mismatch_abs) return false;
    }
  }
  return true;
}

std::optional<long> first_converged_round(const SimulationTrace& trace,
                                          const ConvergenceTolerances& tol) {
  for (long r = tol.window; r < static_cast<long>(trace.records.size()); ++r)
    if (detect_convergence(trace, r, tol)) return r;
  return std::nullopt;
}

}  // namespace dispatchsim
