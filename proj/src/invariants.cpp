#include "hthk/invariants.hpp"

#include <algorithm>
#include <cmath>

#include "hthk/fixed_topology.hpp"
#include "hthk/spectral.hpp"

namespace hthk {

std::vector<std::string> structural_violations(const OpinionState& state, double tie_tol) {
  std::vector<std::string> out;
  const FrozenTopology topo(build_digraph(state, tie_tol));
  const auto& a = topo.matrix().values();
  const auto& s = topo.structure();

  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (std::abs(a.row(i).sum() - 1.0) > kStochasticTol) out.push_back("row " + std::to_string(i + 1) + " is not stochastic");
    if (!(a(i, i) > 0.0)) out.push_back("agent " + std::to_string(i + 1) + " has no self-loop");
  }

  // Kahn's algorithm on the condensation.
  std::vector<std::size_t> indegree(s.sccs.size(), 0);
  for (const auto& succ : s.condensation) {
    for (std::size_t t : succ) ++indegree[t];
  }
  std::vector<std::size_t> ready;
  for (std::size_t k = 0; k < indegree.size(); ++k) {
    if (indegree[k] == 0) ready.push_back(k);
  }
  std::size_t ordered = 0;
  while (!ready.empty()) {
    const std::size_t k = ready.back();
    ready.pop_back();
    ++ordered;
    for (std::size_t t : s.condensation[k]) {
      if (--indegree[t] == 0) ready.push_back(t);
    }
  }
  if (ordered != s.sccs.size()) out.push_back("condensation has a cycle");

  for (std::size_t w = 0; w < s.wccs.size(); ++w) {
    const bool has_sink = std::any_of(s.wccs[w].begin(), s.wccs[w].end(), [&](Agent i) { return s.is_sink(s.scc_of[i]); });
    if (!has_sink) out.push_back("weak component " + std::to_string(w + 1) + " has no sink");
  }

  for (std::size_t k = 0; k < s.sccs.size(); ++k) {
    if (s.class_of[k] != ComponentClass::OpenMinded) continue;
    const auto& m = s.sccs[k];
    Eigen::MatrixXd block(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
    for (std::size_t r = 0; r < m.size(); ++r) {
      for (std::size_t c = 0; c < m.size(); ++c) block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = topo.matrix()(m[r], m[c]);
    }
    if (!(spectral_radius(block).value < 1.0)) out.push_back("open SCC " + std::to_string(k + 1) + " has spectral radius >= 1");
  }

  const auto& mstar = topo.m_star();
  for (Eigen::Index i = 0; i < mstar.rows(); ++i) {
    if (std::abs(mstar.row(i).sum() - 1.0) > kLimitMatrixTol || mstar.row(i).minCoeff() < -kLimitMatrixTol) {
      out.push_back("M* row " + std::to_string(i + 1) + " is not stochastic");
    }
  }
  for (const auto& b : topo.blocks().moderate_blocks) {
    const auto off = static_cast<Eigen::Index>(b.offset);
    const auto len = static_cast<Eigen::Index>(b.size);
    const auto blk = mstar.block(off, off, len, len);
    for (Eigen::Index r = 1; r < len; ++r) {
      if ((blk.row(r) - blk.row(0)).cwiseAbs().maxCoeff() > kLimitMatrixTol) {
        out.push_back("M* block of SCC " + std::to_string(b.scc + 1) + " has unequal rows");
        break;
      }
    }
  }

  const auto x = state.opinions();
  const auto next = topo.apply(x);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const auto [nlo, nhi] = std::minmax_element(next.begin(), next.end());
  if (*nlo < *lo || *nhi > *hi) out.push_back("opinion range grew in one step");
  return out;
}

}  // namespace hthk
