#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace hthk {

struct SpectralEstimate {
  double value = 0.0;
  // Collatz-Wielandt bracket of the dominant irreducible block at termination.
  double lower = 0.0;
  double upper = 0.0;
  std::size_t iterations = 0;
};

inline constexpr double kSpectralTol = 1e-12;
inline constexpr std::size_t kSpectralMaxIterations = 1'000'000;

/// Perron root of a nonnegative square matrix: the largest root over the
/// irreducible diagonal blocks of its sparsity pattern, each found by power
/// iteration from the all-ones vector on the block plus the identity. Stops
/// once the Collatz-Wielandt bracket is narrower than `tol`; throws
/// ConvergenceError after `max_iterations`.
SpectralEstimate spectral_radius(const Eigen::MatrixXd& block, double tol = kSpectralTol,
                                 std::size_t max_iterations = kSpectralMaxIterations);

}  // namespace hthk
