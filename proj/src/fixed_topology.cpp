#include "hthk/fixed_topology.hpp"

#include <algorithm>
#include <cmath>

#include "hthk/error.hpp"

namespace hthk {

namespace {

constexpr double kMinReciprocalCondition = 1e-14;

std::vector<double> stationary_distribution(const Eigen::MatrixXd& block) {
  // (M^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  const Eigen::Index s = block.rows();
  Eigen::MatrixXd system = block.transpose() - Eigen::MatrixXd::Identity(s, s);
  system.row(s - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
  rhs(s - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (!(lu.rcond() > kMinReciprocalCondition)) {
    throw StructuralError("stationary distribution system of a moderate-minded block is singular");
  }
  const Eigen::VectorXd pi = lu.solve(rhs);
  std::vector<double> out(pi.data(), pi.data() + s);
  for (double& p : out) {
    if (p < -1e-12) throw StructuralError("stationary distribution has a negative entry");
    p = std::max(p, 0.0);
  }
  return out;
}

}  // namespace

FrozenTopology::FrozenTopology(ProximityDigraph digraph)
    : digraph_(std::move(digraph)),
      structure_(analyze_structure(digraph_)),
      matrix_(build_matrix(digraph_)),
      blocks_(canonical_decomposition(matrix_, structure_)) {
  const auto nm = static_cast<Eigen::Index>(blocks_.n_moderate);
  m_star_ = Eigen::MatrixXd::Zero(nm, nm);
  for (const BlockRange& b : blocks_.moderate_blocks) {
    const auto off = static_cast<Eigen::Index>(b.offset);
    const auto size = static_cast<Eigen::Index>(b.size);
    auto pi = stationary_distribution(blocks_.moderate.block(off, off, size, size));
    for (Eigen::Index r = 0; r < size; ++r) {
      for (Eigen::Index c = 0; c < size; ++c) m_star_(off + r, off + c) = pi[static_cast<std::size_t>(c)];
    }
    stationary_.push_back(std::move(pi));
  }

  if (blocks_.n_open > 0) {
    const auto no = static_cast<Eigen::Index>(blocks_.n_open);
    resolvent_.compute(Eigen::MatrixXd::Identity(no, no) - blocks_.theta);
    if (!(resolvent_.rcond() > kMinReciprocalCondition)) {
      throw StructuralError("I - Theta is singular: an open-minded block has spectral radius 1");
    }
  }
}

std::vector<double> FrozenTopology::final_value(std::span<const double> y) const {
  if (y.size() != digraph_.size()) throw ValidationError("vector length does not match topology size");
  std::vector<double> f(y.size(), 0.0);

  for (const BlockRange& b : blocks_.closed_blocks) {
    const auto& members = structure_.sccs[b.scc];
    const double mean = neighborhood_mean(members, y);
    for (Agent i : members) f[i] = mean;
  }

  for (std::size_t k = 0; k < blocks_.moderate_blocks.size(); ++k) {
    const auto& members = structure_.sccs[blocks_.moderate_blocks[k].scc];
    const auto& pi = stationary_[k];
    const double pivot = y[members.front()];
    double acc = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) acc += pi[m] * (y[members[m]] - pivot);
    for (Agent i : members) f[i] = pivot + acc;
  }

  if (blocks_.n_open > 0) {
    const auto no = static_cast<Eigen::Index>(blocks_.n_open);
    Eigen::VectorXd fc(static_cast<Eigen::Index>(blocks_.n_closed));
    Eigen::VectorXd fm(static_cast<Eigen::Index>(blocks_.n_moderate));
    const auto closed = blocks_.closed_agents();
    const auto moderate = blocks_.moderate_agents();
    for (std::size_t k = 0; k < closed.size(); ++k) fc(static_cast<Eigen::Index>(k)) = f[closed[k]];
    for (std::size_t k = 0; k < moderate.size(); ++k) fm(static_cast<Eigen::Index>(k)) = f[moderate[k]];
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(no);
    if (fc.size() > 0) rhs += blocks_.theta_closed * fc;
    if (fm.size() > 0) rhs += blocks_.theta_moderate * fm;
    const Eigen::VectorXd v = resolvent_.solve(rhs);
    const auto open = blocks_.open_agents();
    for (std::size_t k = 0; k < open.size(); ++k) f[open[k]] = v(static_cast<Eigen::Index>(k));
  }
  return f;
}

FinalValueResult FrozenTopology::analyze(std::span<const double> y) const {
  FinalValueResult res;
  res.fvct = final_value(y);
  res.m_star = m_star_;
  const auto moderate = blocks_.moderate_agents();
  const auto open = blocks_.open_agents();
  res.moderate_agents.assign(moderate.begin(), moderate.end());
  res.open_agents.assign(open.begin(), open.end());
  for (Agent i : open) res.open_solution.push_back(res.fvct[i]);
  res.is_equilibrium_input = max_abs_difference(apply(y), y) <= kEquilibriumTol;
  return res;
}

FinalValueResult fvct(const OpinionState& state, double tie_tol) {
  const FrozenTopology topo(build_digraph(state, tie_tol));
  return topo.analyze(state.opinions());
}

bool is_equilibrium(const OpinionState& state, double tol, double tie_tol) {
  if (!(tol > 0.0)) throw ValidationError("equilibrium tolerance must be positive");
  const auto next = average(build_digraph(state, tie_tol), state.opinions());
  return max_abs_difference(next, state.opinions()) <= tol;
}

Prop1Part2Report check_prop1_part2(const OpinionState& state, double tie_tol) {
  const FrozenTopology topo(build_digraph(state, tie_tol));
  const auto f = topo.final_value(state.opinions());
  const OpinionState limit = state.with_opinions(f);
  const ProximityDigraph limit_graph = build_digraph(limit, tie_tol);
  const StructureReport limit_structure = analyze_structure(limit_graph);

  Prop1Part2Report rep;
  rep.same_topology = topo.digraph() == limit_graph;
  rep.fvct_is_equilibrium = is_equilibrium(limit, kEquilibriumTol, tie_tol);
  rep.no_moderate = !topo.structure().has_class(ComponentClass::ModerateMinded);

  rep.extremes_closed_minded = true;
  for (const auto& members : limit_structure.wccs) {
    double lo = f[members.front()], hi = lo;
    for (Agent i : members) {
      lo = std::min(lo, f[i]);
      hi = std::max(hi, f[i]);
    }
    // Solver rounding can put an open-minded value a few ulps past a closed one.
    const double slack = 1e-9 * std::max(1.0, hi - lo);
    bool has_min = false, has_max = false;
    for (Agent i : members) {
      if (limit_structure.agent_class(i) != ComponentClass::ClosedMinded) continue;
      has_min = has_min || f[i] <= lo + slack;
      has_max = has_max || f[i] >= hi - slack;
    }
    rep.extremes_closed_minded = rep.extremes_closed_minded && has_min && has_max;
  }
  return rep;
}

}  // namespace hthk
