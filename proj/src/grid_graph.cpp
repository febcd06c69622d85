#include "dispatchsim/grid_graph.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace dispatchsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string bus_name(int i) { return "bus " + std::to_string(i + 1); }

// Breadth-first sweep over ICU indices. next(i) pushes i's successors.
template <typename NextFn>
std::vector<bool> bfs(int n, const std::vector<int>& seeds, NextFn next) {
  std::vector<bool> seen(n, false);
  std::queue<int> q;
  for (int s : seeds) {
    if (!seen[s]) {
      seen[s] = true;
      q.push(s);
    }
  }
  while (!q.empty()) {
    const int i = q.front();
    q.pop();
    next(i, [&](int j) {
      if (!seen[j]) {
        seen[j] = true;
        q.push(j);
      }
    });
  }
  return seen;
}

bool all(const std::vector<bool>& v) {
  for (bool b : v)
    if (!b) return false;
  return true;
}

}  // namespace

void GridGraph::validate() const {
  const auto n = icu_adjacency.rows();
  if (icu_adjacency.cols() != n)
    throw std::invalid_argument("icu_adjacency must be square");
  if (n == 0) throw std::invalid_argument("the grid needs at least one bus");
  if (er_to_icu.size() != n || icu_to_er.size() != n)
    throw std::invalid_argument(
        "er_to_icu / icu_to_er must have one entry per bus");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = icu_adjacency(i, j);
      if (!std::isfinite(w) || w < 0.0)
        throw std::invalid_argument("edge weight " + bus_name(int(j)) + " -> " +
                                    bus_name(int(i)) + " must be finite and >= 0");
      if (i == j && w != 0.0)
        throw std::invalid_argument(bus_name(int(i)) +
                                    " has a self-loop; the diagonal must be zero");
    }
    if (er_to_icu[i] != 0.0 && er_to_icu[i] != 1.0)
      throw std::invalid_argument("er_to_icu[" + bus_name(int(i)) +
                                  "] must be exactly 0 or 1");
    if (icu_to_er[i] != 0.0 && icu_to_er[i] != 1.0)
      throw std::invalid_argument("icu_to_er[" + bus_name(int(i)) +
                                  "] must be exactly 0 or 1");
  }
}

bool GridGraph::is_undirected(double tol) const {
  return (icu_adjacency - icu_adjacency.transpose()).cwiseAbs().maxCoeff() <= tol;
}

DerivedMatrices build_derived(const GridGraph& g, bool require_undirected) {
  g.validate();
  if (require_undirected && !g.is_undirected())
    throw std::invalid_argument("topology must be undirected here");
  DerivedMatrices d;
  d.laplacian =
      Eigen::MatrixXd(g.in_weight().asDiagonal()) - g.icu_adjacency;
  d.leader_matrix = d.laplacian + Eigen::MatrixXd(g.er_to_icu.asDiagonal());
  d.absorption_c = g.icu_to_er.asDiagonal();
  d.absorption_c_prime =
      Eigen::VectorXd(g.er_to_icu.cwiseProduct(g.icu_to_er)).asDiagonal();
  return d;
}

bool check_spanning_tree_from_er(const GridGraph& g) {
  const int n = g.n_icus();
  std::vector<int> seeds;
  for (int i = 0; i < n; ++i)
    if (g.er_to_icu[i] > 0.0) seeds.push_back(i);
  // follow sender -> receiver: from j, reach every i with adjacency(i, j) > 0
  const auto seen = bfs(n, seeds, [&](int j, auto push) {
    for (int i = 0; i < n; ++i)
      if (g.icu_adjacency(i, j) > 0.0) push(i);
  });
  return all(seen);
}

bool check_paths_to_er(const GridGraph& g) {
  const int n = g.n_icus();
  std::vector<int> seeds;
  for (int i = 0; i < n; ++i)
    if (g.icu_to_er[i] > 0.0) seeds.push_back(i);
  // walk edges backwards: from receiver i to every sender j
  const auto seen = bfs(n, seeds, [&](int i, auto push) {
    for (int j = 0; j < n; ++j)
      if (g.icu_adjacency(i, j) > 0.0) push(j);
  });
  return all(seen);
}

bool check_bidirectional_er_neighbor(const GridGraph& g) {
  const int n = g.n_icus();
  bool any = false;
  for (int i = 0; i < n; ++i) any = any || (g.er_to_icu[i] * g.icu_to_er[i] > 0.0);
  if (!any) return false;
  // undirected view must be one component
  const auto seen = bfs(n, {0}, [&](int i, auto push) {
    for (int j = 0; j < n; ++j)
      if (g.icu_adjacency(i, j) > 0.0 || g.icu_adjacency(j, i) > 0.0) push(j);
  });
  return all(seen);
}

StepSizeBounds step_size_bounds(const GridGraph& g) {
  const int n = g.n_icus();
  StepSizeBounds b;
  b.eps_max.resize(n);
  const Eigen::VectorXd w = g.in_weight();
  for (int i = 0; i < n; ++i) {
    const double total = w[i] + g.er_to_icu[i];
    b.eps_max[i] = total > 0.0 ? 1.0 / total : kInf;
  }
  const double wmax = w.maxCoeff();
  b.mu_max = wmax > 0.0 ? 1.0 / wmax : kInf;
  return b;
}

SpectralCheck absorption_spectral_check(const GridGraph& g, double mu,
                                    AbsorptionKind kind) {
  const auto d = build_derived(g);
  const double mu_max = step_size_bounds(g).mu_max;
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("mu must be a positive finite step size");
  if (mu > mu_max)
    throw std::invalid_argument("mu exceeds the stability bound 1/max in-weight");

  const int n = g.n_icus();
  const Eigen::MatrixXd& c = kind == AbsorptionKind::Reporters
                                 ? d.absorption_c
                                 : d.absorption_c_prime;
  const Eigen::MatrixXd m = (Eigen::MatrixXd::Identity(n, n) - c) *
                            (Eigen::MatrixXd::Identity(n, n) - mu * d.laplacian);
  SpectralCheck chk;
  chk.radius = Eigen::EigenSolver<Eigen::MatrixXd>(m, false)
                   .eigenvalues()
                   .cwiseAbs()
                   .maxCoeff();
  chk.stable = chk.radius < 1.0 - kStabilityMargin;
  return chk;
}

}  // namespace dispatchsim
