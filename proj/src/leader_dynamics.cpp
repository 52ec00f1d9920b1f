#include "hthk/leader_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "hthk/convergence_factors.hpp"
#include "hthk/error.hpp"
#include "hthk/fixed_topology.hpp"
#include "hthk/spectral.hpp"

namespace hthk {

namespace {

// Predicted residual (second modulus / rho)^horizon below which a limit is
// expected to be visible at the horizon.
constexpr double kResolvableResidual = 1e-9;
constexpr std::size_t kEntrainmentLookahead = 10;

Eigen::MatrixXd principal_block(const AveragingMatrix& a, std::span<const Agent> members) {
  const auto s = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd b(s, s);
  for (Eigen::Index r = 0; r < s; ++r) {
    for (Eigen::Index c = 0; c < s; ++c) b(r, c) = a(members[static_cast<std::size_t>(r)], members[static_cast<std::size_t>(c)]);
  }
  return b;
}

std::vector<double> eigen_moduli(const Eigen::MatrixXd& block) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(block, false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("eigenvalue computation failed");
  std::vector<double> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(std::abs(solver.eigenvalues()(i)));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

const LeaderEntry* LeaderReport::entry_for(std::size_t scc) const {
  for (const auto& e : entries) {
    if (e.scc == scc) return &e;
  }
  return nullptr;
}

LeaderReport leader_report(const AveragingMatrix& matrix, const StructureReport& structure) {
  if (matrix.size() != structure.size()) throw ValidationError("matrix and structure sizes differ");
  LeaderReport rep;
  const std::size_t m = structure.sccs.size();
  rep.rho.assign(m, std::nullopt);
  for (std::size_t s = 0; s < m; ++s) {
    if (structure.class_of[s] != ComponentClass::OpenMinded) continue;
    rep.rho[s] = spectral_radius(principal_block(matrix, structure.sccs[s])).value;
  }

  const auto reach = reachable_sccs(structure);
  for (std::size_t s = 0; s < m; ++s) {
    if (structure.class_of[s] != ComponentClass::OpenMinded) continue;
    LeaderEntry e;
    e.scc = s;
    for (std::size_t t : reach[s]) {
      if (structure.class_of[t] == ComponentClass::OpenMinded) e.successors.push_back(t);
    }
    double best = 0.0;
    for (std::size_t t : e.successors) best = std::max(best, *rep.rho[t]);
    std::vector<std::size_t> top;
    for (std::size_t t : e.successors) {
      if (*rep.rho[t] >= best - kLeaderTieTol) top.push_back(t);
    }
    e.tie = top.size() > 1;
    e.leader = std::find(top.begin(), top.end(), s) != top.end() ? s : top.front();
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

Theorem3Report check_theorem3(const OpinionState& state, std::size_t horizon, double tie_tol) {
  if (horizon == 0) throw ValidationError("horizon must be positive");
  Theorem3Report rep;
  rep.horizon = horizon;
  const std::size_t n = state.size();
  const FrozenTopology topo(build_digraph(state, tie_tol));
  const auto& structure = topo.structure();
  const auto& g = topo.digraph();
  const auto leaders = leader_report(topo.matrix(), structure);
  const auto reach = reachable_sccs(structure);
  rep.no_moderate = !structure.has_class(ComponentClass::ModerateMinded);

  const auto x0 = std::vector<double>(state.opinions().begin(), state.opinions().end());
  const auto f0 = topo.final_value(x0);

  // Frozen trajectory: fvct constancy and departures of the free digraph.
  {
    std::vector<double> x = x0;
    std::size_t next_sample = 1;
    for (std::size_t t = 1; t <= horizon; ++t) {
      auto next = topo.apply(x);
      const bool stalled = next == x;
      x = std::move(next);
      if (!rep.free_topology_changed && !(build_digraph(state.with_opinions(x), tie_tol) == g)) rep.free_topology_changed = true;
      if (t == next_sample || t == horizon || stalled) {
        if (max_abs_difference(topo.final_value(x), f0) > kFvctConstancyTol) rep.fvct_constant = false;
        next_sample = t < 64 ? t + 1 : 2 * t;
      }
      if (stalled) break;
    }
  }

  std::vector<std::vector<double>> moduli(structure.sccs.size());
  for (const auto& e : leaders.entries) moduli[e.scc] = eigen_moduli(principal_block(topo.matrix(), structure.sccs[e.scc]));

  // Stationary weights of every sink SCC, used to remove the eigenvalue-1 mode
  // that rounding would otherwise seed in the deviation iteration.
  std::vector<std::vector<double>> sink_weights(structure.sccs.size());
  {
    const auto& blocks = topo.blocks();
    for (const auto& b : blocks.closed_blocks) sink_weights[b.scc].assign(b.size, 1.0 / static_cast<double>(b.size));
    for (std::size_t k = 0; k < blocks.moderate_blocks.size(); ++k) sink_weights[blocks.moderate_blocks[k].scc] = topo.stationary(k);
  }

  for (const auto& entry : leaders.entries) {
    const std::size_t s = entry.scc;
    const double rho_leader = *leaders.rho[entry.leader];

    bool premise_ok = true;
    std::vector<Agent> group;
    for (std::size_t t : reach[s]) {
      if (structure.class_of[t] == ComponentClass::ModerateMinded) premise_ok = false;
      group.insert(group.end(), structure.sccs[t].begin(), structure.sccs[t].end());
    }

    // Largest modulus left once the leader's Perron root is set aside.
    double second = 0.0;
    for (std::size_t t : entry.successors) {
      const auto& mods = moduli[t];
      const std::size_t skip = t == entry.leader ? 1 : 0;
      if (mods.size() > skip) second = std::max(second, mods[skip]);
    }
    const bool resolvable =
        premise_ok && (second == 0.0 ||
                       static_cast<double>(horizon) * std::log(second / rho_leader) <= std::log(kResolvableResidual));

    // Deviation e(t) = x(t) - fvct evolves as e(t+1) = A e(t); it is rescaled
    // every step so that k_i = e_i(t+1)/e_i(t) stays resolvable long after
    // x(t) - fvct has dropped below double precision.
    std::vector<double> e(n, 0.0), next(n, 0.0);
    for (Agent i : group) {
      const double d = x0[i] - f0[i];
      e[i] = std::abs(d) > kDegenerateTol ? d : 0.0;
    }
    const auto& members = structure.sccs[s];
    const auto& leader_members = structure.sccs[entry.leader];
    std::vector<std::optional<double>> last_k(members.size());
    std::vector<int> leader_sign(horizon + 1, 2);
    std::vector<char> follower_plus(horizon + 1, 0), follower_minus(horizon + 1, 0);
    auto record_signs = [&](std::size_t t) {
      int ls = sign_of(e[leader_members.front()]);
      for (Agent j : leader_members) {
        if (sign_of(e[j]) != ls) ls = 2;
      }
      leader_sign[t] = ls;
      follower_plus[t] = std::all_of(members.begin(), members.end(), [&](Agent i) { return e[i] >= 0.0; });
      follower_minus[t] = std::all_of(members.begin(), members.end(), [&](Agent i) { return e[i] <= 0.0; });
    };
    record_signs(0);
    std::size_t reached = 0;
    for (std::size_t t = 1; t <= horizon; ++t) {
      for (Agent i : group) next[i] = neighborhood_mean(g.out_neighbors(i), e);
      for (std::size_t sink : reach[s]) {
        if (sink_weights[sink].empty()) continue;
        const auto& sm = structure.sccs[sink];
        double mode = 0.0;
        for (std::size_t q = 0; q < sm.size(); ++q) mode += sink_weights[sink][q] * next[sm[q]];
        for (Agent i : sm) next[i] -= mode;
      }
      double scale = 0.0;
      for (Agent i : group) scale = std::max(scale, std::abs(next[i]));
      for (std::size_t q = 0; q < members.size(); ++q) {
        const Agent i = members[q];
        last_k[q] = e[i] != 0.0 ? std::optional<double>(next[i] / e[i]) : std::nullopt;
      }
      if (scale == 0.0) {
        for (Agent i : group) e[i] = 0.0;
        reached = t;
        break;
      }
      for (Agent i : group) e[i] = next[i] / scale;
      record_signs(t);
      reached = t;
    }

    for (std::size_t q = 0; q < members.size(); ++q) {
      const Agent i = members[q];
      if (std::abs(e[i]) <= 1e-12 || !last_k[q]) continue;  // Delta_i = 0: nothing to check
      AgentRateLimit lim{i, rho_leader, last_k[q], Verdict::Inconclusive};
      if (std::abs(*last_k[q] - rho_leader) <= kRateLimitTol) {
        lim.verdict = Verdict::Holds;
      } else if (resolvable && reached == horizon) {
        lim.verdict = Verdict::Violated;
      }
      rep.k_limits.push_back(lim);
    }

    if (entry.leader != s && *leaders.rho[s] < rho_leader - kLeaderTieTol && reached == horizon) {
      DirectionCheck dc{s, entry.leader, std::nullopt, Verdict::Inconclusive};
      const int ls = leader_sign[horizon];
      const auto& ok = ls > 0 ? follower_plus : follower_minus;
      if ((ls == 1 || ls == -1) && ok[horizon]) {
        std::size_t t1 = horizon;
        while (t1 > 0 && leader_sign[t1 - 1] == ls && ok[t1 - 1]) --t1;
        if (t1 + kEntrainmentLookahead <= horizon) dc.t1 = t1;
      }
      if (dc.t1) {
        dc.verdict = Verdict::Holds;
      } else if (resolvable) {
        dc.verdict = Verdict::Violated;
      }
      rep.directions.push_back(dc);
    }
  }

  rep.direction_entrained = std::none_of(rep.directions.begin(), rep.directions.end(),
                                         [](const DirectionCheck& d) { return d.verdict != Verdict::Holds; });

  const auto any = [](const auto& range, Verdict v) {
    return std::any_of(range.begin(), range.end(), [v](const auto& item) { return item.verdict == v; });
  };
  if (!rep.fvct_constant || any(rep.k_limits, Verdict::Violated) || any(rep.directions, Verdict::Violated)) {
    rep.status = Verdict::Violated;
  } else if (any(rep.k_limits, Verdict::Inconclusive) || any(rep.directions, Verdict::Inconclusive)) {
    rep.status = Verdict::Inconclusive;
  } else {
    rep.status = Verdict::Holds;
  }
  return rep;
}

}  // namespace hthk
