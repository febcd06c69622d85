#pragma once

#include <Eigen/Dense>

namespace dispatchsim {

// ---------------------------------------------------------------------------
// Communication topology: N ICU bus nodes plus the energy router (ER) as a
// distinguished extra node. Buses are 1..N in configs and 0..N-1 in code.
//
// Edge-direction convention -- READ THIS FIRST, it is the reverse of several
// graph libraries: icu_adjacency(i, j) > 0 means "j can send to i", i.e. rows
// are receivers and columns are senders. er_to_icu[i] is the ER->ICU broadcast
// link for bus i, icu_to_er[i] the ICU->ER report link; both are exactly 0/1.
// ---------------------------------------------------------------------------
struct GridGraph {
  Eigen::MatrixXd icu_adjacency;  // N x N, nonnegative, zero diagonal
  Eigen::VectorXd er_to_icu;      // N, entries in {0,1}
  Eigen::VectorXd icu_to_er;      // N, entries in {0,1}

  int n_icus() const { return static_cast<int>(icu_adjacency.rows()); }

  // Throws std::invalid_argument when shapes or entry invariants are broken.
  void validate() const;

  bool is_undirected(double tol = 0.0) const;

  // Total incoming ICU weight per bus (row sums of icu_adjacency).
  Eigen::VectorXd in_weight() const { return icu_adjacency.rowwise().sum(); }
};

// Matrices derived from the topology that both protocols and the stability
// check consume. The absorption matrices zero the mismatch estimates of buses
// whose imbalance the ER replenishes directly.
struct DerivedMatrices {
  Eigen::MatrixXd laplacian;           // degree matrix minus adjacency
  Eigen::MatrixXd leader_matrix;       // laplacian + diag(er_to_icu)
  Eigen::MatrixXd absorption_c;        // diag(icu_to_er)
  Eigen::MatrixXd absorption_c_prime;  // diag(er_to_icu .* icu_to_er)
};

// Builds all derived matrices. With require_undirected, rejects an asymmetric
// icu_adjacency (std::invalid_argument).
DerivedMatrices build_derived(const GridGraph& g, bool require_undirected = false);

// True iff every ICU is reachable from the ER along directed edges
// (ER->ICU links first, then sender-to-receiver ICU hops).
bool check_spanning_tree_from_er(const GridGraph& g);

// True iff every ICU has a directed path ending in some bus that reports to
// the ER (icu_to_er = 1 there).
bool check_paths_to_er(const GridGraph& g);

// True iff some bus links to the ER in both directions AND the ICU graph is
// connected when viewed as undirected.
bool check_bidirectional_er_neighbor(const GridGraph& g);

// Step-size bounds from the row weights; callers must stay strictly inside
// (0, bound). A bus with zero total in-weight is unconstrained: +infinity.
struct StepSizeBounds {
  Eigen::VectorXd eps_max;  // per bus: 1 / (icu in-weight + er_to_icu)
  double mu_max = 0.0;      // 1 / max icu in-weight
};
StepSizeBounds step_size_bounds(const GridGraph& g);

// Which absorption matrix the stability check uses: the grid-connected
// protocol zeroes estimates at reporting buses (diag(icu_to_er)); the
// integrated protocol only at bidirectional ER neighbors.
enum class AbsorptionKind { Reporters, Bidirectional };

// Spectral radius of (I - C_sel)(I - mu L); the mismatch-consensus error
// system is stable iff the radius is strictly inside the unit disk. A margin
// separates true contraction from row-stochastic boundary cases (radius 1).
inline constexpr double kStabilityMargin = 1e-9;

struct SpectralCheck {
  double radius = 0.0;
  bool stable = false;  // radius < 1 - kStabilityMargin
};
SpectralCheck absorption_spectral_check(const GridGraph& g, double mu, AbsorptionKind kind);

}  // namespace dispatchsim
