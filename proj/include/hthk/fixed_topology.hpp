#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hthk/core_model.hpp"
#include "hthk/graph_structure.hpp"

namespace hthk {

inline constexpr double kEquilibriumTol = 1e-12;

struct FinalValueResult {
  std::vector<double> fvct;
  /// Block-diagonal limit M* over the moderate agents, rows/cols in canonical order.
  Eigen::MatrixXd m_star;
  std::vector<Agent> moderate_agents;
  /// Solution v of (I - Theta) v = Theta_C C y_C + Theta_M M* y_M, canonical order.
  std::vector<double> open_solution;
  std::vector<Agent> open_agents;
  bool is_equilibrium_input = false;
};

/// A digraph held fixed: its structure, canonical blocks, the moderate limit
/// and a factorisation of I - Theta, reused across many final-value queries.
class FrozenTopology {
 public:
  explicit FrozenTopology(ProximityDigraph digraph);

  const ProximityDigraph& digraph() const noexcept { return digraph_; }
  const StructureReport& structure() const noexcept { return structure_; }
  const AveragingMatrix& matrix() const noexcept { return matrix_; }
  const CanonicalBlocks& blocks() const noexcept { return blocks_; }
  const Eigen::MatrixXd& m_star() const noexcept { return m_star_; }
  /// Stationary distribution of one moderate SCC, members in sorted order.
  const std::vector<double>& stationary(std::size_t moderate_block) const { return stationary_.at(moderate_block); }

  /// lim_t A^t y for this fixed A.
  std::vector<double> final_value(std::span<const double> y) const;
  FinalValueResult analyze(std::span<const double> y) const;
  /// One averaging step with the frozen matrix.
  std::vector<double> apply(std::span<const double> y) const { return average(digraph_, y); }

 private:
  ProximityDigraph digraph_;
  StructureReport structure_;
  AveragingMatrix matrix_;
  CanonicalBlocks blocks_;
  Eigen::MatrixXd m_star_;
  std::vector<std::vector<double>> stationary_;
  Eigen::PartialPivLU<Eigen::MatrixXd> resolvent_;
};

FinalValueResult fvct(const OpinionState& state, double tie_tol = 0.0);

/// ||A(y) y - y||_inf <= tol.
bool is_equilibrium(const OpinionState& state, double tol = kEquilibriumTol, double tie_tol = 0.0);

struct Prop1Part2Report {
  bool same_topology = false;
  bool fvct_is_equilibrium = false;
  bool no_moderate = false;
  bool extremes_closed_minded = false;
};

/// Evaluates the four flags independently; when same_topology holds the other
/// three are expected to hold as well.
Prop1Part2Report check_prop1_part2(const OpinionState& state, double tie_tol = 0.0);

}  // namespace hthk
