#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hthk/core_model.hpp"

namespace hthk {

enum class ComponentClass { ClosedMinded, ModerateMinded, OpenMinded };

std::string_view to_string(ComponentClass c);

/// SCC/WCC decomposition of a proximity digraph with the closed/moderate/open
/// classification of every SCC.
///
/// SCCs and WCCs are listed in order of their smallest member, members sorted.
struct StructureReport {
  std::vector<std::vector<Agent>> sccs;
  std::vector<std::size_t> scc_of;
  /// Successor SCC indices of each SCC in the condensation (no self edges).
  std::vector<std::vector<std::size_t>> condensation;
  std::vector<ComponentClass> class_of;
  std::vector<std::vector<Agent>> wccs;
  std::vector<std::size_t> wcc_of;
  /// WCCs of the subgraph induced by open-minded agents.
  std::vector<std::vector<Agent>> open_wccs;
  /// canonical_perm[k] is the agent placed at canonical position k.
  std::vector<Agent> canonical_perm;

  std::size_t size() const noexcept { return scc_of.size(); }
  ComponentClass agent_class(Agent i) const { return class_of[scc_of[i]]; }
  bool is_open(Agent i) const { return agent_class(i) == ComponentClass::OpenMinded; }
  bool is_sink(std::size_t scc) const { return condensation[scc].empty(); }
  bool has_class(ComponentClass c) const;
  /// Number of SCCs of one class.
  std::size_t count(ComponentClass c) const;
  /// SCC indices of one class, in canonical order.
  std::vector<std::size_t> sccs_of_class(ComponentClass c) const;
};

StructureReport analyze_structure(const ProximityDigraph& digraph);

/// For every SCC, the SCCs reachable from it in the condensation, itself
/// included, sorted by index.
std::vector<std::vector<std::size_t>> reachable_sccs(const StructureReport& structure);

struct BlockRange {
  std::size_t scc;
  std::size_t offset;  // position inside the class segment
  std::size_t size;
};

/// P A P^T split into the closed (C), moderate (M) and open (Theta) blocks
/// plus the couplings from open rows into closed and moderate columns.
struct CanonicalBlocks {
  std::vector<Agent> perm;
  std::size_t n_closed = 0;
  std::size_t n_moderate = 0;
  std::size_t n_open = 0;
  std::vector<BlockRange> closed_blocks;
  std::vector<BlockRange> moderate_blocks;
  std::vector<BlockRange> open_blocks;
  Eigen::MatrixXd closed;
  Eigen::MatrixXd moderate;
  Eigen::MatrixXd theta;
  Eigen::MatrixXd theta_closed;
  Eigen::MatrixXd theta_moderate;

  /// Lower-block-triangular canonical form rebuilt from the blocks.
  Eigen::MatrixXd assemble() const;
  /// Agents of each class segment in canonical order.
  std::span<const Agent> closed_agents() const { return {perm.data(), n_closed}; }
  std::span<const Agent> moderate_agents() const { return {perm.data() + n_closed, n_moderate}; }
  std::span<const Agent> open_agents() const { return {perm.data() + n_closed + n_moderate, n_open}; }
};

CanonicalBlocks canonical_decomposition(const AveragingMatrix& matrix, const StructureReport& structure);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return lo <= v && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, disjoint union of closed intervals (touching intervals merge).
std::vector<Interval> normalize_union(std::vector<Interval> parts);
bool intersects(std::span<const Interval> set, Interval iv);

struct WccRange {
  std::vector<Agent> members;
  Interval opinion_range;
  std::vector<Interval> sensing_range;
};

/// Opinion range and sensing range of every WCC, in WCC order.
std::vector<WccRange> wcc_ranges(const OpinionState& state, const StructureReport& structure);

}  // namespace hthk
