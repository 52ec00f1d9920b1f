#include "hthk/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hthk/error.hpp"

namespace hthk {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // FNV-1a over 64-bit words followed by a splitmix finaliser.
  h ^= v;
  h *= 0x100000001b3ULL;
  h ^= h >> 29;
  return h;
}

std::uint64_t hash_adjacency(const std::vector<std::vector<Agent>>& out) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& row : out) {
    h = mix(h, row.size());
    for (Agent j : row) h = mix(h, j + 1);
  }
  h ^= h >> 31;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 32;
  return h;
}

}  // namespace

OpinionState::OpinionState(std::vector<double> opinions, std::vector<double> bounds)
    : opinions_(std::move(opinions)), bounds_(std::move(bounds)) {
  if (opinions_.empty()) throw ValidationError("opinion state must contain at least one agent");
  if (opinions_.size() != bounds_.size()) {
    throw ValidationError("opinions and bounds differ in length (" + std::to_string(opinions_.size()) +
                          " vs " + std::to_string(bounds_.size()) + ")");
  }
  for (std::size_t i = 0; i < opinions_.size(); ++i) {
    if (!std::isfinite(opinions_[i])) throw ValidationError("opinion of agent " + std::to_string(i + 1) + " is not finite");
    if (!std::isfinite(bounds_[i])) throw ValidationError("bound of agent " + std::to_string(i + 1) + " is not finite");
    if (!(bounds_[i] > 0.0)) throw ValidationError("bounds must be strictly positive (agent " + std::to_string(i + 1) + ")");
  }
}

OpinionState OpinionState::with_opinions(std::vector<double> opinions) const {
  return OpinionState(std::move(opinions), bounds_);
}

ProximityDigraph::ProximityDigraph(std::vector<std::vector<Agent>> out_neighbors) : out_(std::move(out_neighbors)) {
  const std::size_t n = out_.size();
  if (n == 0) throw ValidationError("digraph must have at least one node");
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = out_[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    if (!row.empty() && row.back() >= n) throw ValidationError("edge target out of range at node " + std::to_string(i + 1));
    if (!std::binary_search(row.begin(), row.end(), i)) {
      throw ValidationError("node " + std::to_string(i + 1) + " lacks its self-loop");
    }
  }
  fingerprint_ = hash_adjacency(out_);
}

bool ProximityDigraph::has_edge(Agent from, Agent to) const {
  const auto& row = out_.at(from);
  return std::binary_search(row.begin(), row.end(), to);
}

std::size_t ProximityDigraph::edge_count() const noexcept {
  std::size_t total = 0;
  for (const auto& row : out_) total += row.size();
  return total;
}

std::vector<std::vector<Agent>> ProximityDigraph::in_neighbors() const {
  std::vector<std::vector<Agent>> in(out_.size());
  for (Agent i = 0; i < out_.size(); ++i) {
    for (Agent j : out_[i]) in[j].push_back(i);
  }
  return in;
}

ProximityDigraph build_digraph(const OpinionState& state, double tie_tol) {
  if (!std::isfinite(tie_tol)) throw ValidationError("tie_tol must be finite");
  const auto y = state.opinions();
  const auto r = state.bounds();
  const std::size_t n = state.size();
  std::vector<std::vector<Agent>> out(n);
  for (Agent i = 0; i < n; ++i) {
    const double reach = r[i] + tie_tol;
    if (reach < 0.0) throw ValidationError("tie_tol removes the self-loop of agent " + std::to_string(i + 1));
    for (Agent j = 0; j < n; ++j) {
      if (std::abs(y[i] - y[j]) <= reach) out[i].push_back(j);
    }
  }
  return ProximityDigraph(std::move(out));
}

AveragingMatrix build_matrix(const ProximityDigraph& digraph) {
  const auto n = static_cast<Eigen::Index>(digraph.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Agent i = 0; i < digraph.size(); ++i) {
    const auto row = digraph.out_neighbors(i);
    const double w = 1.0 / static_cast<double>(row.size());
    for (Agent j : row) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
  }
  return AveragingMatrix(std::move(a));
}

double neighborhood_mean(std::span<const Agent> members, std::span<const double> y) {
  const double pivot = y[members.front()];
  double acc = 0.0;
  for (Agent j : members) acc += y[j] - pivot;
  return pivot + acc / static_cast<double>(members.size());
}

std::vector<double> average(const ProximityDigraph& digraph, std::span<const double> y) {
  if (y.size() != digraph.size()) throw ValidationError("vector length does not match digraph size");
  std::vector<double> out(y.size());
  for (Agent i = 0; i < y.size(); ++i) out[i] = neighborhood_mean(digraph.out_neighbors(i), y);
  return out;
}

OpinionState step(const OpinionState& state, double tie_tol) {
  return state.with_opinions(average(build_digraph(state, tie_tol), state.opinions()));
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("vector lengths differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace hthk
