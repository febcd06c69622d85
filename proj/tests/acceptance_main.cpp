// Acceptance suite: one numbered check per release criterion, each printed as
// a single PASS/FAIL line with its runtime. Run with no arguments for the
// whole list, or with criterion numbers to run a subset (the per-criterion
// ctest entries do exactly that). Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dispatchsim/commands.hpp"
#include "dispatchsim/config_file.hpp"
#include "dispatchsim/grid_graph.hpp"
#include "dispatchsim/oracle.hpp"
#include "dispatchsim/scenario.hpp"
#include "dispatchsim/trace_io.hpp"
#include "reference_impl.hpp"

using namespace dispatchsim;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kScenarioDir = DISPATCHSIM_SCENARIO_DIR;

// Published benchmark optima the implementation must reproduce.
const double kPStar[5] = {50.000, 46.329, 53.210, 63.165, 83.922};
const double kPmgStar = 256.853;
const double kLossStar = 3.479;
const double kPStarIso[5] = {105.523, 70.000, 100.000, 133.148, 154.162};
const double kLambdaIso = 88.541;
const double kLossIso = 12.833;

struct Outcome {
  bool pass = true;
  std::string detail;
  double ms = 0.0;
};

void fail(Outcome& o, const std::string& why) {
  o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += why;
}

void require(Outcome& o, bool ok, const std::string& why) {
  if (!ok) fail(o, why);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

ScenarioConfig grid_scenario() {
  return parse_scenario_file(kScenarioDir + "/paper_v_grid.cfg");
}
ScenarioConfig integrated_scenario() {
  return parse_scenario_file(kScenarioDir + "/paper_v_integrated.cfg");
}
ScenarioConfig sweep_scenario() {
  return parse_scenario_file(kScenarioDir + "/paper_v_sweep.cfg");
}

// --- criterion 1: grid-connected optimum --------------------------------
Outcome criterion_1() {
  Outcome o;
  const auto sys = grid_scenario().system;
  const auto t0 = Clock::now();
  const auto sol = solve_grid_connected(sys);
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  for (int i = 0; i < 5; ++i)
    require(o, std::abs(sol.p_star[i] - kPStar[i]) <= 0.005,
            "p" + std::to_string(i + 1) + "=" + fmt(sol.p_star[i]));
  require(o, std::abs(sol.p_mg_star - kPmgStar) <= 0.005,
          "p_mg=" + fmt(sol.p_mg_star));
  require(o, std::abs(sol.total_loss - kLossStar) <= 0.005,
          "loss=" + fmt(sol.total_loss));
  require(o, o.ms < 1.0, "runtime " + fmt(o.ms) + " ms >= 1 ms");
  if (o.pass) o.detail = "P*, P_MG*, loss all within 0.005 MW";
  return o;
}

// --- criterion 2: isolated optimum --------------------------------------
Outcome criterion_2() {
  Outcome o;
  const auto sys = grid_scenario().system;
  const auto t0 = Clock::now();
  const auto sol = solve_isolated(sys);
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  for (int i = 0; i < 5; ++i)
    require(o, std::abs(sol.p_star[i] - kPStarIso[i]) <= 0.005,
            "p" + std::to_string(i + 1) + "=" + fmt(sol.p_star[i]));
  require(o, std::abs(sol.total_loss - kLossIso) <= 0.005,
          "loss=" + fmt(sol.total_loss));
  require(o, std::abs(sol.lambda_star - kLambdaIso) <= 0.005,
          "lambda=" + fmt(sol.lambda_star) + " vs published 88.541 (the "
          "published price does not satisfy the stated balance equation: its "
          "residual is +1.41 MW; powers and loss above do match)");
  require(o, o.ms < 10.0, "runtime " + fmt(o.ms) + " ms >= 10 ms");
  if (o.pass) o.detail = "lambda*, P*, loss all within tolerance";
  return o;
}

// --- criterion 3: grid-connected protocol convergence -------------------
Outcome criterion_3() {
  Outcome o;
  const auto cfg = grid_scenario();
  const auto t0 = Clock::now();
  const auto trace = run(cfg);
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  long reached = -1;
  for (const auto& rec : trace.records) {
    double lam_err = 0.0, p_err = 0.0;
    for (int i = 0; i < 6; ++i) {
      lam_err = std::max(lam_err, std::abs(rec.agents[i].lambda_i - 85.0));
      const double target = i < 5 ? kPStar[i] : 0.0;
      p_err = std::max(p_err, std::abs(rec.agents[i].p_i - target));
    }
    if (lam_err < 1e-3 && std::abs(rec.p_mg - kPmgStar) < 0.01 && p_err <= 0.01) {
      reached = rec.round;
      break;
    }
  }
  require(o, reached >= 0 && reached <= 600, "targets not met inside 600 rounds");

  const auto& last = trace.records.back();
  double lam_err = 0.0, p_err = 0.0;
  for (int i = 0; i < 6; ++i) {
    lam_err = std::max(lam_err, std::abs(last.agents[i].lambda_i - 85.0));
    p_err = std::max(p_err, std::abs(last.agents[i].p_i - (i < 5 ? kPStar[i] : 0.0)));
  }
  require(o, lam_err < 1e-3, "final lambda error " + fmt(lam_err));
  require(o, std::abs(last.p_mg - kPmgStar) < 0.01, "final p_mg=" + fmt(last.p_mg));
  require(o, p_err <= 0.01, "final p error " + fmt(p_err));
  require(o, o.ms < 1000.0, "runtime " + fmt(o.ms) + " ms >= 1 s");
  if (o.pass)
    o.detail = "targets reached at round " + std::to_string(reached) +
               " and held at 600";
  return o;
}

// --- criterion 4: grid-connected conservation through events ------------
Outcome criterion_4() {
  Outcome o;
  const auto cfg = grid_scenario();
  const auto t0 = Clock::now();
  const auto trace = run(cfg);
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  double worst = 0.0;
  long worst_round = 0;
  for (const auto& rec : trace.records) {
    const double sum_dp = rec.real_total_mismatch + rec.p_mg;
    const double gap = std::abs(rec.est_total_mismatch + rec.p_mg - sum_dp);
    const double rel = gap / (1.0 + std::abs(sum_dp));
    if (rel > worst) {
      worst = rel;
      worst_round = rec.round;
    }
  }
  require(o, worst <= 1e-9, "worst relative gap " + fmt(worst) + " at round " +
                                std::to_string(worst_round));
  if (o.pass) o.detail = "worst relative gap " + fmt(worst);
  return o;
}

// --- criterion 5: integrated protocol mode cycle ------------------------
Outcome criterion_5() {
  Outcome o;
  const auto cfg = integrated_scenario();
  const auto t0 = Clock::now();
  const auto trace = run(cfg);
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  const auto& r540 = trace.records[540];
  double lo = r540.agents[0].lambda_i, hi = lo, dev = 0.0;
  for (const auto& a : r540.agents) {
    lo = std::min(lo, a.lambda_i);
    hi = std::max(hi, a.lambda_i);
    dev = std::max(dev, std::abs(a.lambda_i - kLambdaIso));
  }
  require(o, hi - lo < 0.05, "spread at 540 = " + fmt(hi - lo));
  require(o, dev <= 0.05, "island price dev " + fmt(dev) + " from 88.541");

  const auto& last = trace.records[1200];
  double lam_err = 0.0;
  for (const auto& a : last.agents)
    lam_err = std::max(lam_err, std::abs(a.lambda_i - 85.0));
  require(o, lam_err <= 1e-2, "final lambda error " + fmt(lam_err));
  require(o, std::abs(last.p_mg - kPmgStar) <= 0.1, "final p_mg=" + fmt(last.p_mg));
  require(o, o.ms < 2000.0, "runtime " + fmt(o.ms) + " ms >= 2 s");
  if (o.pass)
    o.detail = "island spread " + fmt(hi - lo) + ", final lambda error " +
               fmt(lam_err);
  return o;
}

// --- criterion 6: estimate/actual identity through switches -------------
Outcome criterion_6() {
  Outcome o;
  const auto cfg = integrated_scenario();
  const auto t0 = Clock::now();
  const auto trace = run(cfg);
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  double worst = 0.0;
  long worst_round = 0;
  for (const auto& rec : trace.records) {
    const double rel = std::abs(rec.est_total_mismatch - rec.real_total_mismatch) /
                       (1.0 + std::abs(rec.real_total_mismatch));
    if (rel > worst) {
      worst = rel;
      worst_round = rec.round;
    }
  }
  require(o, worst <= 1e-9, "worst relative gap " + fmt(worst) + " at round " +
                                std::to_string(worst_round));
  if (o.pass) o.detail = "worst relative gap " + fmt(worst);
  return o;
}

// --- criterion 7: stability radius property suite -----------------------
GridGraph random_reporting_digraph(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  GridGraph g;
  g.icu_adjacency = Eigen::MatrixXd::Zero(n, n);
  g.er_to_icu = Eigen::VectorXd::Ones(n);
  g.icu_to_er = Eigen::VectorXd::Zero(n);
  const int root = static_cast<int>(u01(rng) * n);
  g.icu_to_er[root] = 1.0;
  // arborescence rooted at the reporter: each node listens to its parent, so
  // the root's absorption drains every estimate downstream of it
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::swap(order[0], *std::find(order.begin(), order.end(), root));
  for (int k = 1; k < n; ++k) {
    const int parent = order[static_cast<int>(u01(rng) * k)];
    g.icu_adjacency(order[k], parent) = 0.5 + 1.5 * u01(rng);
  }
  for (int e = 0; e < n; ++e) {  // extra random edges keep the property
    const int i = static_cast<int>(u01(rng) * n);
    const int j = static_cast<int>(u01(rng) * n);
    if (i != j) g.icu_adjacency(i, j) = 0.5 + 1.5 * u01(rng);
  }
  for (int i = 0; i < n; ++i)
    if (u01(rng) < 0.2) g.icu_to_er[i] = 1.0;
  return g;
}

GridGraph random_cutoff_digraph(std::mt19937& rng, int n, int pocket) {
  // the first `pocket` nodes send but never receive from the rest, and none
  // of them reports: no absorbed node can ever influence their estimates
  GridGraph g = random_reporting_digraph(rng, n);
  for (int i = 0; i < pocket; ++i) {
    g.icu_to_er[i] = 0.0;
    for (int j = pocket; j < n; ++j) g.icu_adjacency(i, j) = 0.0;
  }
  // keep the pocket internally connected so L is not trivially zero there
  for (int i = 1; i < pocket; ++i)
    g.icu_adjacency(i - 1, i) = g.icu_adjacency(i, i - 1) = 1.0;
  bool any = false;
  for (int i = pocket; i < n; ++i) any = any || g.icu_to_er[i] > 0.0;
  if (!any) g.icu_to_er[n - 1] = 1.0;
  return g;
}

Outcome criterion_7() {
  Outcome o;
  std::mt19937 rng(90210);
  const auto t0 = Clock::now();

  int good = 0;
  for (int rep = 0; rep < 220; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 11);  // up to 12
    const auto g = random_reporting_digraph(rng, n);
    const double mu = 0.5 * step_size_bounds(g).mu_max;
    const auto chk = absorption_spectral_check(g, mu, AbsorptionKind::Reporters);
    if (chk.radius < 1.0) ++good;
    else fail(o, "radius " + fmt(chk.radius) + " on a reporting graph (n=" +
                  std::to_string(n) + ")");
  }
  require(o, good >= 200, "only " + std::to_string(good) + " stable graphs");

  int bad = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 4 + static_cast<int>(rng() % 9);
    const int pocket = 1 + static_cast<int>(rng() % (n / 2));
    const auto g = random_cutoff_digraph(rng, n, pocket);
    const double mu = 0.5 * step_size_bounds(g).mu_max;
    const auto chk = absorption_spectral_check(g, mu, AbsorptionKind::Reporters);
    if (chk.radius >= 1.0 - 1e-9) ++bad;
    else fail(o, "radius " + fmt(chk.radius) + " despite an unreachable pocket");
  }
  require(o, bad >= 50, "only " + std::to_string(bad) + " violating graphs");

  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  require(o, o.ms < 5000.0, "runtime " + fmt(o.ms) + " ms >= 5 s");
  if (o.pass)
    o.detail = std::to_string(good) + " stable + " + std::to_string(bad) +
               " violating graphs classified correctly";
  return o;
}

// --- criterion 8: isolated solver vs exhaustive search ------------------
Outcome criterion_8() {
  Outcome o;
  std::mt19937 rng(424242);
  const auto t0 = Clock::now();
  int checked = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 110; ++rep) {
    const int n = rep % 2 == 0 ? 2 : 3;
    const auto sys = refimpl::random_isolated_instance(rng, n);
    DispatchSolution sol;
    try {
      sol = solve_isolated(sys);
    } catch (const std::exception& e) {
      fail(o, std::string("solver refused instance ") + std::to_string(rep) +
                  ": " + e.what());
      continue;
    }
    const auto brute = refimpl::brute_force_isolated(sys);
    if (!brute.found) continue;  // grid missed the feasible sliver; skip
    ++checked;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(sol.p_star[i] - brute.p[i]));
  }
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  require(o, checked >= 100, "only " + std::to_string(checked) + " comparisons");
  require(o, worst <= 0.01, "worst per-generator gap " + fmt(worst) + " MW");
  require(o, o.ms < 30000.0, "runtime " + fmt(o.ms) + " ms >= 30 s");
  if (o.pass)
    o.detail = std::to_string(checked) + " instances, worst gap " + fmt(worst) +
               " MW";
  return o;
}

// --- criterion 9: KKT audit of every produced solution ------------------
Outcome criterion_9() {
  Outcome o;
  const auto sys = grid_scenario().system;
  const auto t0 = Clock::now();

  const auto grid_sol = solve_grid_connected(sys);
  auto report = verify_kkt(sys, grid_sol, /*isolated=*/false);
  require(o, report.pass, "grid-connected solution failed the KKT audit");

  const auto iso_sol = solve_isolated(sys);
  report = verify_kkt(sys, iso_sol, /*isolated=*/true);
  require(o, report.pass, "isolated solution failed the KKT audit");

  std::mt19937 rng(424242);  // same stream as criterion 8
  int audited = 2;
  for (int rep = 0; rep < 110; ++rep) {
    const int n = rep % 2 == 0 ? 2 : 3;
    const auto inst = refimpl::random_isolated_instance(rng, n);
    try {
      const auto sol = solve_isolated(inst);
      if (!verify_kkt(inst, sol, true).pass) {
        fail(o, "instance " + std::to_string(rep) + " failed the KKT audit");
      }
      ++audited;
    } catch (const std::exception&) {
      // infeasible random draw: nothing to audit
    }
  }
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  if (o.pass) o.detail = std::to_string(audited) + " solutions audited";
  return o;
}

// --- criterion 10: step-size sweep ordering ------------------------------
Outcome criterion_10() {
  Outcome o;
  const auto base = sweep_scenario();
  const auto t0 = Clock::now();

  const auto eps = run_sweep(base, "eps", {0.1, 0.01});
  const auto mu = run_sweep(base, "mu", {0.1, 0.01});
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  require(o, eps[0].converged && eps[1].converged && mu[0].converged &&
              mu[1].converged,
          "a sweep point did not converge inside the horizon");
  if (!o.pass) return o;

  const double eps_ratio = static_cast<double>(*eps[1].lambda_round) /
                           static_cast<double>(*eps[0].lambda_round);
  require(o, eps_ratio >= 5.0,
          "eps=0.01 lambda round only " + fmt(eps_ratio) + "x slower");

  const long mu_shift = std::labs(*mu[1].lambda_round - *mu[0].lambda_round);
  require(o, mu_shift <= 2, "mu=0.01 shifted the lambda round by " +
                                std::to_string(mu_shift) + " rounds");

  const double mu_ratio = static_cast<double>(*mu[1].pmg_round) /
                          static_cast<double>(*mu[0].pmg_round);
  require(o, mu_ratio >= 3.0,
          "mu=0.01 p_mg round only " + fmt(mu_ratio) + "x slower");
  if (o.pass)
    o.detail = "eps ratio " + fmt(eps_ratio) + "x, mu lambda shift " +
               std::to_string(mu_shift) + ", mu p_mg ratio " + fmt(mu_ratio) + "x";
  return o;
}

// --- criterion 11: byte-identical traces ---------------------------------
Outcome criterion_11() {
  Outcome o;
  const auto t0 = Clock::now();
  for (const auto* name : {"/paper_v_grid.cfg", "/paper_v_integrated.cfg"}) {
    const auto cfg = parse_scenario_file(kScenarioDir + name);
    const auto a = trace_to_csv(run(cfg));
    const auto b = trace_to_csv(run(cfg));
    require(o, a == b, std::string(name + 1) + " reruns differ");
  }
  o.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  if (o.pass) o.detail = "both scenario traces byte-identical across reruns";
  return o;
}

struct Criterion {
  int id;
  const char* title;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "grid-connected optimum", criterion_1},
    {2, "isolated optimum", criterion_2},
    {3, "grid-connected protocol convergence", criterion_3},
    {4, "grid-connected conservation through events", criterion_4},
    {5, "integrated protocol mode cycle", criterion_5},
    {6, "estimate/actual mismatch identity", criterion_6},
    {7, "stability radius property suite", criterion_7},
    {8, "isolated solver vs exhaustive search", criterion_8},
    {9, "KKT audit of produced solutions", criterion_9},
    {10, "step-size sweep ordering", criterion_10},
    {11, "byte-identical traces", criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int a = 1; a < argc; ++a) wanted.push_back(std::atoi(argv[a]));

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), c.id) == wanted.end())
      continue;
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("unexpected exception: ") + e.what();
    }
    std::printf("[%2d] %s  %s: %s (%.2f ms)\n", c.id, o.pass ? "PASS" : "FAIL",
                c.title, o.detail.c_str(), o.ms);
    if (!o.pass) ++failures;
  }
  return failures;
}
