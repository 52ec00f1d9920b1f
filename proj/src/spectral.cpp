#include "hthk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hthk/core_model.hpp"
#include "hthk/error.hpp"
#include "hthk/graph_structure.hpp"

namespace hthk {

namespace {

// Power iteration on B + I for an irreducible nonnegative B. The shifted
// matrix is primitive, so the Collatz-Wielandt bracket of a positive iterate
// closes on rho(B) + 1 even when B itself is periodic.
SpectralEstimate irreducible_radius(const Eigen::MatrixXd& b, double tol, std::size_t max_iterations) {
  if (b.rows() == 1) return {b(0, 0), b(0, 0), b(0, 0), 0};
  const Eigen::MatrixXd shifted = b + Eigen::MatrixXd::Identity(b.rows(), b.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(b.rows());
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd w = shifted * v;
    const Eigen::ArrayXd ratio = w.array() / v.array();
    const double lo = ratio.minCoeff() - 1.0;
    const double hi = ratio.maxCoeff() - 1.0;
    if (hi - lo < tol) return {0.5 * (lo + hi), lo, hi, it};
    v = w / w.maxCoeff();
  }
  throw ConvergenceError("power iteration did not converge within " + std::to_string(max_iterations) + " iterations");
}

}  // namespace

SpectralEstimate spectral_radius(const Eigen::MatrixXd& block, double tol, std::size_t max_iterations) {
  if (block.rows() != block.cols()) throw ValidationError("spectral radius needs a square matrix");
  if (block.size() == 0) return {};
  if ((block.array() < 0.0).any()) throw ValidationError("spectral radius routine expects a nonnegative matrix");
  if (!block.allFinite()) throw ValidationError("spectral radius routine expects finite entries");

  // rho is the largest radius over the irreducible diagonal blocks of the
  // sparsity pattern; self-loops do not change that partition.
  const auto n = static_cast<std::size_t>(block.rows());
  std::vector<std::vector<Agent>> pattern(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) pattern[i].push_back(j);
    }
  }
  const auto structure = analyze_structure(ProximityDigraph(std::move(pattern)));

  SpectralEstimate best;
  for (const auto& members : structure.sccs) {
    const auto s = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd sub(s, s);
    for (Eigen::Index r = 0; r < s; ++r) {
      for (Eigen::Index c = 0; c < s; ++c) sub(r, c) = block(static_cast<Eigen::Index>(members[static_cast<std::size_t>(r)]), static_cast<Eigen::Index>(members[static_cast<std::size_t>(c)]));
    }
    const auto est = irreducible_radius(sub, tol, max_iterations);
    best.iterations = std::max(best.iterations, est.iterations);
    if (est.value > best.value) {
      best.value = est.value;
      best.lower = est.lower;
      best.upper = est.upper;
    }
  }
  best.lower = std::min(best.lower, best.value);
  best.upper = std::max(best.upper, best.value);
  return best;
}

}  // namespace hthk
