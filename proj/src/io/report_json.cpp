#include "hthk/io/report_json.hpp"

#include <algorithm>

namespace hthk::io {

namespace {

Json one_based(std::span<const Agent> agents) {
  Json out = Json::array();
  for (Agent a : agents) out.push_back(a + 1);
  return out;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json optional_index(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json to_json(const TrajectoryReport& r, std::optional<std::size_t> tau, bool with_snapshots) {
  Json j;
  j["mode"] = std::string(to_string(r.mode));
  j["steps_run"] = r.steps_run;
  j["converged"] = r.converged;
  j["final_residual"] = r.final_residual;
  j["topology_changes"] = r.topology_changes;
  j["tau_candidate"] = optional_index(r.tau_candidate);
  j["tau"] = optional_index(tau);
  j["final_opinions"] = r.final_snapshot().opinions;
  if (with_snapshots) {
    Json snaps = Json::array();
    for (const auto& s : r.snapshots) snaps.push_back({{"t", s.t}, {"fingerprint", s.fingerprint}, {"opinions", s.opinions}});
    j["snapshots"] = std::move(snaps);
  }
  return j;
}

Json to_json(const StructureReport& s, const OpinionState& state) {
  Json j;
  j["n"] = s.size();
  Json sccs = Json::array();
  for (std::size_t k = 0; k < s.sccs.size(); ++k) {
    Json succ = Json::array();
    for (std::size_t t : s.condensation[k]) succ.push_back(t + 1);
    sccs.push_back({{"id", k + 1},
                    {"class", std::string(to_string(s.class_of[k]))},
                    {"members", one_based(s.sccs[k])},
                    {"successors", std::move(succ)}});
  }
  j["sccs"] = std::move(sccs);
  Json counts;
  for (auto c : {ComponentClass::ClosedMinded, ComponentClass::ModerateMinded, ComponentClass::OpenMinded}) {
    counts[std::string(to_string(c))] = s.count(c);
  }
  j["class_counts"] = std::move(counts);
  Json wccs = Json::array();
  for (const auto& w : wcc_ranges(state, s)) {
    Json sensing = Json::array();
    for (const auto& iv : w.sensing_range) sensing.push_back({iv.lo, iv.hi});
    wccs.push_back({{"members", one_based(w.members)},
                    {"opinion_range", {w.opinion_range.lo, w.opinion_range.hi}},
                    {"sensing_range", std::move(sensing)}});
  }
  j["wccs"] = std::move(wccs);
  Json open = Json::array();
  for (const auto& w : s.open_wccs) open.push_back(one_based(w));
  j["open_wccs"] = std::move(open);
  j["canonical_order"] = one_based(s.canonical_perm);
  return j;
}

Json to_json(const FinalValueResult& r) {
  Json j;
  j["fvct"] = r.fvct;
  j["is_equilibrium_input"] = r.is_equilibrium_input;
  j["moderate_agents"] = one_based(r.moderate_agents);
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < r.m_star.rows(); ++i) {
    std::vector<double> row(r.m_star.row(i).begin(), r.m_star.row(i).end());
    rows.push_back(std::move(row));
  }
  j["m_star"] = std::move(rows);
  j["open_agents"] = one_based(r.open_agents);
  j["open_solution"] = r.open_solution;
  return j;
}

Json to_json(const Theorem1Report& r, const NeighborhoodSpec& spec) {
  Json j;
  j["applicable"] = r.applicable;
  j["conclusions_verified"] = r.conclusions_verified;
  j["first_violation_step"] = optional_index(r.first_violation);
  j["violation"] = r.violation;
  j["epsilon"] = spec.epsilon;
  j["delta"] = spec.delta;
  return j;
}

Json to_json(const Theorem2Report& r, const ConvergenceFactors& f) {
  Json j;
  Json conds;
  for (std::size_t c = 0; c < r.cond.size(); ++c) conds[std::to_string(c + 1)] = r.cond[c];
  j["conditions"] = std::move(conds);
  j["all_hold"] = r.all_hold;
  j["ambiguous_sign_pairs"] = r.ambiguous_sign_pairs;
  j["condition5_witness"] = r.condition5_witness
                                ? Json::array({r.condition5_witness->first + 1, r.condition5_witness->second + 1})
                                : Json(nullptr);
  Json k = Json::array();
  for (const auto& v : f.k) k.push_back(optional_number(v));
  j["k"] = std::move(k);
  j["delta"] = f.delta;
  return j;
}

Json to_json(const Theorem3Report& r) {
  Json j;
  j["status"] = std::string(to_string(r.status));
  j["horizon"] = r.horizon;
  j["fvct_constant"] = r.fvct_constant;
  j["no_moderate"] = r.no_moderate;
  j["free_topology_changed"] = r.free_topology_changed;
  j["direction_entrained"] = r.direction_entrained;
  Json limits = Json::array();
  for (const auto& l : r.k_limits) {
    limits.push_back({{"agent", l.agent + 1},
                      {"target_rho", l.target_rho},
                      {"final_k", optional_number(l.final_k)},
                      {"achieved", l.verdict == Verdict::Holds},
                      {"verdict", std::string(to_string(l.verdict))}});
  }
  j["k_limits"] = std::move(limits);
  Json dirs = Json::array();
  for (const auto& d : r.directions) {
    dirs.push_back({{"follower_scc", d.follower_scc + 1},
                    {"leader_scc", d.leader_scc + 1},
                    {"t1", optional_index(d.t1)},
                    {"verdict", std::string(to_string(d.verdict))}});
  }
  j["directions"] = std::move(dirs);
  return j;
}

Json to_json(const LeaderReport& r, const StructureReport& s) {
  Json j = Json::array();
  for (const auto& e : r.entries) {
    Json succ = Json::array();
    for (std::size_t t : e.successors) succ.push_back(t + 1);
    j.push_back({{"scc", e.scc + 1},
                 {"members", one_based(s.sccs[e.scc])},
                 {"rho", *r.rho[e.scc]},
                 {"successors", std::move(succ)},
                 {"leader", e.leader + 1},
                 {"leader_rho", *r.rho[e.leader]},
                 {"tie", e.tie}});
  }
  return j;
}

}  // namespace hthk::io
