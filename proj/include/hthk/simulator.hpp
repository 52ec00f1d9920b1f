#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hthk/core_model.hpp"

namespace hthk {

enum class Mode { Free, Frozen };
std::string_view to_string(Mode m);

struct SimulationOptions {
  std::size_t max_steps = 100000;
  double convergence_tol = 1e-12;
  double tie_tol = 0.0;
  Mode mode = Mode::Free;
};

inline constexpr std::size_t kDefaultStabilityWindow = 100;
/// Every step up to this one is kept; later steps are thinned.
inline constexpr std::size_t kFullSnapshotSteps = 10000;
inline constexpr std::size_t kSnapshotTail = 64;

struct Snapshot {
  std::size_t t = 0;
  std::vector<double> opinions;
  std::uint64_t fingerprint = 0;
};

struct TrajectoryReport {
  std::vector<Snapshot> snapshots;
  /// Steps t at which G(x(t+1)) differs from G(x(t)).
  std::vector<std::size_t> topology_changes;
  std::optional<std::size_t> tau_candidate;
  bool converged = false;
  double final_residual = 0.0;
  std::size_t steps_run = 0;
  Mode mode = Mode::Free;

  const Snapshot& final_snapshot() const { return snapshots.back(); }
  /// Snapshot recorded at step t, if it was retained.
  const Snapshot* at(std::size_t t) const;
};

/// Called with (t, x(t)) for every state of the run, t = 0..steps_run.
using StepObserver = std::function<void(std::size_t, std::span<const double>)>;

/// Iterates x(t+1) = A(x(t)) x(t) (Free) or x(t+1) = A(x(0)) x(t) (Frozen)
/// until the step delta in the max norm is at most convergence_tol or
/// max_steps updates have been made.
TrajectoryReport simulate(const OpinionState& initial, const SimulationOptions& options = {},
                          const StepObserver& observer = {});

/// tau_candidate when the run converged and the digraph held for at least
/// `stability_window` steps after it; otherwise no certificate.
std::optional<std::size_t> detect_tau(const TrajectoryReport& report,
                                      std::size_t stability_window = kDefaultStabilityWindow);

/// Opinions after exactly `t` updates (free dynamics), replayed from x(0).
OpinionState state_at_step(const OpinionState& initial, std::size_t t, double tie_tol = 0.0);

}  // namespace hthk
