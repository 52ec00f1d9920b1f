#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hthk {

using Agent = std::size_t;

/// Opinions paired with per-agent confidence bounds.
///
/// Construction validates that both vectors have the same non-zero length,
/// that every value is finite, and that every bound is strictly positive.
class OpinionState {
 public:
  OpinionState(std::vector<double> opinions, std::vector<double> bounds);

  std::size_t size() const noexcept { return opinions_.size(); }
  std::span<const double> opinions() const noexcept { return opinions_; }
  std::span<const double> bounds() const noexcept { return bounds_; }
  double opinion(Agent i) const { return opinions_.at(i); }
  double bound(Agent i) const { return bounds_.at(i); }

  /// Same bounds, new opinions.
  OpinionState with_opinions(std::vector<double> opinions) const;

  friend bool operator==(const OpinionState&, const OpinionState&) = default;

 private:
  std::vector<double> opinions_;
  std::vector<double> bounds_;
};

/// Out-neighbor sets of a digraph on nodes 0..n-1 in which every node has a
/// self-loop. Lists are kept sorted and duplicate free.
class ProximityDigraph {
 public:
  explicit ProximityDigraph(std::vector<std::vector<Agent>> out_neighbors);

  std::size_t size() const noexcept { return out_.size(); }
  std::span<const Agent> out_neighbors(Agent i) const { return out_.at(i); }
  const std::vector<std::vector<Agent>>& adjacency() const noexcept { return out_; }
  bool has_edge(Agent from, Agent to) const;
  std::size_t edge_count() const noexcept;
  std::vector<std::vector<Agent>> in_neighbors() const;

  /// Hash of the sorted adjacency lists. Equal digraphs share a fingerprint.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  friend bool operator==(const ProximityDigraph& a, const ProximityDigraph& b) {
    return a.fingerprint_ == b.fingerprint_ && a.out_ == b.out_;
  }

 private:
  std::vector<std::vector<Agent>> out_;
  std::uint64_t fingerprint_ = 0;
};

/// Row-stochastic averaging matrix A(y).
class AveragingMatrix {
 public:
  explicit AveragingMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  double operator()(Agent i, Agent j) const { return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

 private:
  Eigen::MatrixXd values_;
};

/// N_i = { j : |y_i - y_j| <= r_i + tie_tol }.
ProximityDigraph build_digraph(const OpinionState& state, double tie_tol = 0.0);

/// a_ij = 1/|N_i| on edges, 0 elsewhere.
AveragingMatrix build_matrix(const ProximityDigraph& digraph);

/// A(G) y evaluated through the neighbor lists.
///
/// Each row mean is taken relative to the opinion of the lowest-indexed
/// neighbor, so agents with identical neighbor sets receive bit-identical
/// values and a block of equal opinions is reproduced exactly.
std::vector<double> average(const ProximityDigraph& digraph, std::span<const double> y);

/// Mean of y over `members`, computed the same way as one row of `average`.
double neighborhood_mean(std::span<const Agent> members, std::span<const double> y);

/// One synchronous update x(t+1) = A(x(t)) x(t).
OpinionState step(const OpinionState& state, double tie_tol = 0.0);

double max_abs_difference(std::span<const double> a, std::span<const double> b);

}  // namespace hthk
