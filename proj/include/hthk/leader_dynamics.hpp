#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "hthk/core_model.hpp"
#include "hthk/graph_structure.hpp"

namespace hthk {

/// Spectral radii closer than this are treated as a tie.
inline constexpr double kLeaderTieTol = 1e-10;
inline constexpr double kRateLimitTol = 1e-6;
inline constexpr double kFvctConstancyTol = 1e-9;

struct LeaderEntry {
  std::size_t scc = 0;
  /// Open-minded SCCs reachable from `scc`, itself included, sorted.
  std::vector<std::size_t> successors;
  std::size_t leader = 0;
  bool tie = false;
};

struct LeaderReport {
  /// One entry per open-minded SCC, in SCC index order.
  std::vector<LeaderEntry> entries;
  /// Spectral radius of each SCC's diagonal block; set for open-minded SCCs.
  std::vector<std::optional<double>> rho;

  const LeaderEntry* entry_for(std::size_t scc) const;
};

/// Leader of every open-minded SCC: the reachable open-minded SCC with the
/// largest block spectral radius. Ties prefer the SCC itself, then the
/// smallest index.
LeaderReport leader_report(const AveragingMatrix& matrix, const StructureReport& structure);

enum class Verdict { Holds, Violated, Inconclusive };
std::string_view to_string(Verdict v);

struct AgentRateLimit {
  Agent agent = 0;
  double target_rho = 0.0;
  std::optional<double> final_k;
  Verdict verdict = Verdict::Inconclusive;
};

struct DirectionCheck {
  std::size_t follower_scc = 0;
  std::size_t leader_scc = 0;
  std::optional<std::size_t> t1;
  Verdict verdict = Verdict::Inconclusive;
};

struct Theorem3Report {
  std::size_t horizon = 0;
  bool fvct_constant = true;
  bool no_moderate = true;
  /// The state-dependent digraph of the frozen trajectory left G_r(x(0)).
  bool free_topology_changed = false;
  std::vector<AgentRateLimit> k_limits;
  std::vector<DirectionCheck> directions;
  bool direction_entrained = true;
  Verdict status = Verdict::Holds;
};

/// Runs x(t+1) = A(x(0)) x(t) for `horizon` steps and checks: fvct(x(t))
/// stays at fvct(x(0)); every agent with nonzero Delta has k_i(x(horizon))
/// within kRateLimitTol of its leader's spectral radius; members of SCCs with
/// a strictly larger-radius leader end up on the leader's side of fvct.
///
/// Checks whose spectral gap is too small to resolve within the horizon are
/// reported Inconclusive rather than Violated.
Theorem3Report check_theorem3(const OpinionState& state, std::size_t horizon, double tie_tol = 0.0);

}  // namespace hthk
