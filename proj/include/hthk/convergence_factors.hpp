#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hthk/core_model.hpp"
#include "hthk/fixed_topology.hpp"
#include "hthk/graph_structure.hpp"

namespace hthk {

/// |Delta_i| at or below this counts as zero; k_i is then undefined.
inline constexpr double kDegenerateTol = 1e-12;
/// Slack for the one-step monotonicity and order comparisons.
inline constexpr double kMonotoneTol = 1e-12;
/// Equality tolerance for k_i = k_j in condition 5(a).
inline constexpr double kEqualFactorTol = 1e-9;
/// Slack on the convex-hull test of the one-step factor bound.
inline constexpr double kHullSlack = 1e-10;

/// Per-step convergence factors of one state.
struct ConvergenceFactors {
  std::vector<double> opinions;  // y
  std::vector<double> next;      // A(y) y
  std::vector<double> fvct;      // fvct(y)
  std::vector<double> delta;     // y - fvct(y)
  std::vector<std::optional<double>> k;
  /// Extremes of k over the open-minded successors with defined k; set for
  /// open-minded agents only.
  std::vector<std::optional<double>> k_min;
  std::vector<std::optional<double>> k_max;

  std::optional<double> k_min_pair(Agent i, Agent j) const;
  std::optional<double> k_max_pair(Agent i, Agent j) const;
};

ConvergenceFactors convergence_factors(const OpinionState& state, double tie_tol = 0.0,
                                       double degenerate_tol = kDegenerateTol);
/// Factors of y with respect to a frozen matrix (y need not induce it).
ConvergenceFactors convergence_factors(const FrozenTopology& topology, std::span<const double> y,
                                       double degenerate_tol = kDegenerateTol);

/// Open-minded agents reachable from each agent (itself included when open).
std::vector<std::vector<Agent>> open_successors(const StructureReport& structure);
/// Open-minded out-neighbors of i (i itself included when open).
std::vector<Agent> open_children(const ProximityDigraph& digraph, const StructureReport& structure, Agent i);

/// Every agent moves toward fvct without overshooting, or rests on it.
bool is_monotone_step(const ConvergenceFactors& factors, double tol = kMonotoneTol);
bool check_monotone_step(const OpinionState& state, double tie_tol = 0.0);

struct Lemma1Report {
  bool applicable = false;
  bool hull_respected = false;
  std::optional<Agent> first_violation;
};

/// Evaluates k_i(A(y) y) under the matrix A(y) and checks it lies in the
/// hull of the children's k_j(y).
Lemma1Report check_lemma1(const OpinionState& state, double tie_tol = 0.0, double degenerate_tol = kDegenerateTol);

/// Right-hand side of the condition-5(b) inequality for the pair (i, j);
/// the caller orders the pair so that |Delta_i| >= |Delta_j|.
double theorem2_condition5_bound(Agent i, Agent j, const ConvergenceFactors& factors);

struct Theorem2Report {
  std::array<bool, 5> cond{};
  bool all_hold = false;
  /// Same-WCC non-neighbor pairs with opposite Delta signs, ordered by |Delta|.
  std::size_t ambiguous_sign_pairs = 0;
  std::optional<std::pair<Agent, Agent>> condition5_witness;
};

Theorem2Report check_theorem2(const OpinionState& state, double tie_tol = 0.0);

struct Theorem2ForwardReport {
  bool digraph_constant = true;
  bool monotone = true;
  bool distance_bound = true;
  std::size_t steps = 0;
  std::optional<std::size_t> first_violation;
  std::string violation;
  bool ok() const { return digraph_constant && monotone && distance_bound; }
};

/// Runs the free dynamics from `state` and checks the constant-topology and
/// monotone-convergence conclusions step by step, including
/// fvct_i - fvct_j <= x_i(t+1) - x_j(t+1) <= x_i(t) - x_j(t) for aligned
/// open-minded pairs in one WCC.
Theorem2ForwardReport verify_theorem2_forward(const OpinionState& state, std::size_t steps, double tie_tol = 0.0);

}  // namespace hthk
