#include "hthk/graph_structure.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>

#include "hthk/error.hpp"

namespace hthk {

std::string_view to_string(ComponentClass c) {
  switch (c) {
    case ComponentClass::ClosedMinded: return "closed";
    case ComponentClass::ModerateMinded: return "moderate";
    case ComponentClass::OpenMinded: return "open";
  }
  return "?";
}

namespace {

// Iterative Tarjan; returns the SCC id of every node (ids in completion order).
std::vector<std::size_t> tarjan(const ProximityDigraph& g, std::size_t& count) {
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  const std::size_t n = g.size();
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<Agent> stack;
  struct Frame {
    Agent node;
    std::size_t next;
  };
  std::vector<Frame> call;
  std::size_t counter = 0;
  count = 0;

  for (Agent root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto row = g.out_neighbors(f.node);
      if (f.next < row.size()) {
        const Agent w = row[f.next++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      const Agent v = f.node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
      if (low[v] == index[v]) {
        Agent w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
    }
  }
  return comp;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Groups nodes by label, ordered by smallest member.
std::vector<std::vector<Agent>> group_by(const std::vector<std::size_t>& label, std::span<const Agent> nodes) {
  std::vector<std::vector<Agent>> groups;
  std::vector<std::size_t> slot(label.size(), static_cast<std::size_t>(-1));
  for (Agent v : nodes) {
    const std::size_t l = label[v];
    if (slot[l] == static_cast<std::size_t>(-1)) {
      slot[l] = groups.size();
      groups.emplace_back();
    }
    groups[slot[l]].push_back(v);
  }
  return groups;
}

}  // namespace

bool StructureReport::has_class(ComponentClass c) const {
  return std::find(class_of.begin(), class_of.end(), c) != class_of.end();
}

std::size_t StructureReport::count(ComponentClass c) const {
  return static_cast<std::size_t>(std::count(class_of.begin(), class_of.end(), c));
}

std::vector<std::size_t> StructureReport::sccs_of_class(ComponentClass c) const {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < canonical_perm.size()) {
    const std::size_t s = scc_of[canonical_perm[pos]];
    if (class_of[s] == c) out.push_back(s);
    pos += sccs[s].size();
  }
  return out;
}

StructureReport analyze_structure(const ProximityDigraph& digraph) {
  const std::size_t n = digraph.size();
  StructureReport rep;

  std::size_t raw_count = 0;
  const auto raw = tarjan(digraph, raw_count);
  std::vector<Agent> all(n);
  std::iota(all.begin(), all.end(), 0);
  rep.sccs = group_by(raw, all);
  rep.scc_of.assign(n, 0);
  for (std::size_t s = 0; s < rep.sccs.size(); ++s) {
    for (Agent v : rep.sccs[s]) rep.scc_of[v] = s;
  }

  const std::size_t m = rep.sccs.size();
  rep.condensation.assign(m, {});
  for (Agent i = 0; i < n; ++i) {
    for (Agent j : digraph.out_neighbors(i)) {
      if (rep.scc_of[i] != rep.scc_of[j]) rep.condensation[rep.scc_of[i]].push_back(rep.scc_of[j]);
    }
  }
  for (auto& row : rep.condensation) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  rep.class_of.assign(m, ComponentClass::OpenMinded);
  for (std::size_t s = 0; s < m; ++s) {
    if (!rep.condensation[s].empty()) continue;
    // A sink SCC only has edges inside itself, so completeness is a size check.
    const std::size_t size = rep.sccs[s].size();
    const bool complete = std::all_of(rep.sccs[s].begin(), rep.sccs[s].end(),
                                      [&](Agent v) { return digraph.out_neighbors(v).size() == size; });
    rep.class_of[s] = complete ? ComponentClass::ClosedMinded : ComponentClass::ModerateMinded;
  }

  DisjointSet weak(n);
  for (Agent i = 0; i < n; ++i) {
    for (Agent j : digraph.out_neighbors(i)) weak.unite(i, j);
  }
  rep.wcc_of.assign(n, 0);
  std::vector<std::size_t> weak_label(n);
  for (Agent i = 0; i < n; ++i) weak_label[i] = weak.find(i);
  rep.wccs = group_by(weak_label, all);
  for (std::size_t w = 0; w < rep.wccs.size(); ++w) {
    for (Agent v : rep.wccs[w]) rep.wcc_of[v] = w;
  }

  std::vector<Agent> open_nodes;
  DisjointSet open_weak(n);
  for (Agent i = 0; i < n; ++i) {
    if (!rep.is_open(i)) continue;
    open_nodes.push_back(i);
    for (Agent j : digraph.out_neighbors(i)) {
      if (rep.is_open(j)) open_weak.unite(i, j);
    }
  }
  std::vector<std::size_t> open_label(n);
  for (Agent i = 0; i < n; ++i) open_label[i] = open_weak.find(i);
  rep.open_wccs = group_by(open_label, open_nodes);

  // Canonical order: closed, moderate, then open SCCs sinks-first so that
  // Theta is lower block triangular. Ties go to the smallest SCC index.
  rep.canonical_perm.reserve(n);
  for (ComponentClass c : {ComponentClass::ClosedMinded, ComponentClass::ModerateMinded}) {
    for (std::size_t s = 0; s < m; ++s) {
      if (rep.class_of[s] == c) rep.canonical_perm.insert(rep.canonical_perm.end(), rep.sccs[s].begin(), rep.sccs[s].end());
    }
  }
  std::vector<std::size_t> pending(m, 0);
  std::vector<std::vector<std::size_t>> open_preds(m);
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t s = 0; s < m; ++s) {
    if (rep.class_of[s] != ComponentClass::OpenMinded) continue;
    for (std::size_t t : rep.condensation[s]) {
      if (rep.class_of[t] == ComponentClass::OpenMinded) {
        ++pending[s];
        open_preds[t].push_back(s);
      }
    }
    if (pending[s] == 0) ready.push(s);
  }
  while (!ready.empty()) {
    const std::size_t s = ready.top();
    ready.pop();
    rep.canonical_perm.insert(rep.canonical_perm.end(), rep.sccs[s].begin(), rep.sccs[s].end());
    for (std::size_t p : open_preds[s]) {
      if (--pending[p] == 0) ready.push(p);
    }
  }
  if (rep.canonical_perm.size() != n) throw StructuralError("condensation contains a cycle");
  return rep;
}

std::vector<std::vector<std::size_t>> reachable_sccs(const StructureReport& structure) {
  const std::size_t m = structure.sccs.size();
  std::vector<std::vector<std::size_t>> reach(m);
  std::vector<bool> done(m, false);
  // Condensation is acyclic: memoised DFS terminates.
  std::function<void(std::size_t)> visit = [&](std::size_t s) {
    if (done[s]) return;
    std::vector<std::size_t> acc{s};
    for (std::size_t t : structure.condensation[s]) {
      visit(t);
      acc.insert(acc.end(), reach[t].begin(), reach[t].end());
    }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    reach[s] = std::move(acc);
    done[s] = true;
  };
  for (std::size_t s = 0; s < m; ++s) visit(s);
  return reach;
}

Eigen::MatrixXd CanonicalBlocks::assemble() const {
  const auto nc = static_cast<Eigen::Index>(n_closed);
  const auto nm = static_cast<Eigen::Index>(n_moderate);
  const auto no = static_cast<Eigen::Index>(n_open);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nc + nm + no, nc + nm + no);
  a.block(0, 0, nc, nc) = closed;
  a.block(nc, nc, nm, nm) = moderate;
  a.block(nc + nm, 0, no, nc) = theta_closed;
  a.block(nc + nm, nc, no, nm) = theta_moderate;
  a.block(nc + nm, nc + nm, no, no) = theta;
  return a;
}

CanonicalBlocks canonical_decomposition(const AveragingMatrix& matrix, const StructureReport& structure) {
  const std::size_t n = structure.size();
  if (matrix.size() != n) throw ValidationError("matrix and structure sizes differ");

  CanonicalBlocks b;
  b.perm = structure.canonical_perm;
  std::size_t pos = 0;
  while (pos < n) {
    const std::size_t s = structure.scc_of[b.perm[pos]];
    const std::size_t size = structure.sccs[s].size();
    switch (structure.class_of[s]) {
      case ComponentClass::ClosedMinded:
        b.closed_blocks.push_back({s, b.n_closed, size});
        b.n_closed += size;
        break;
      case ComponentClass::ModerateMinded:
        b.moderate_blocks.push_back({s, b.n_moderate, size});
        b.n_moderate += size;
        break;
      case ComponentClass::OpenMinded:
        b.open_blocks.push_back({s, b.n_open, size});
        b.n_open += size;
        break;
    }
    pos += size;
  }

  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd permuted(nn, nn);
  for (Eigen::Index k = 0; k < nn; ++k) {
    for (Eigen::Index l = 0; l < nn; ++l) permuted(k, l) = matrix(b.perm[static_cast<std::size_t>(k)], b.perm[static_cast<std::size_t>(l)]);
  }

  const auto nc = static_cast<Eigen::Index>(b.n_closed);
  const auto nm = static_cast<Eigen::Index>(b.n_moderate);
  const auto no = static_cast<Eigen::Index>(b.n_open);
  b.closed = permuted.block(0, 0, nc, nc);
  b.moderate = permuted.block(nc, nc, nm, nm);
  b.theta_closed = permuted.block(nc + nm, 0, no, nc);
  b.theta_moderate = permuted.block(nc + nm, nc, no, nm);
  b.theta = permuted.block(nc + nm, nc + nm, no, no);

  if ((b.assemble() - permuted).cwiseAbs().maxCoeff() != 0.0) {
    throw ValidationError("matrix is not lower block triangular under the structure's canonical permutation");
  }
  return b;
}

std::vector<Interval> normalize_union(std::vector<Interval> parts) {
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const Interval& iv : parts) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

bool intersects(std::span<const Interval> set, Interval iv) {
  return std::any_of(set.begin(), set.end(), [&](const Interval& s) { return s.lo <= iv.hi && iv.lo <= s.hi; });
}

std::vector<WccRange> wcc_ranges(const OpinionState& state, const StructureReport& structure) {
  if (state.size() != structure.size()) throw ValidationError("state and structure sizes differ");
  std::vector<WccRange> out;
  out.reserve(structure.wccs.size());
  for (const auto& members : structure.wccs) {
    WccRange w;
    w.members = members;
    w.opinion_range = {state.opinion(members.front()), state.opinion(members.front())};
    std::vector<Interval> sensing;
    for (Agent i : members) {
      const double y = state.opinion(i);
      w.opinion_range.lo = std::min(w.opinion_range.lo, y);
      w.opinion_range.hi = std::max(w.opinion_range.hi, y);
      sensing.push_back({y - state.bound(i), y + state.bound(i)});
    }
    w.sensing_range = normalize_union(std::move(sensing));
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace hthk
