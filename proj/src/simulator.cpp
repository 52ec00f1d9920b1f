#include "hthk/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "hthk/error.hpp"

namespace hthk {

namespace {

bool keep_snapshot(std::size_t t) { return t <= kFullSnapshotSteps || std::has_single_bit(t); }

void check_finite(std::span<const double> x, std::size_t t) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw Error("opinion of agent " + std::to_string(i + 1) + " became non-finite at step " + std::to_string(t));
    }
  }
}

}  // namespace

std::string_view to_string(Mode m) { return m == Mode::Free ? "free" : "frozen"; }

const Snapshot* TrajectoryReport::at(std::size_t t) const {
  auto it = std::lower_bound(snapshots.begin(), snapshots.end(), t,
                             [](const Snapshot& s, std::size_t v) { return s.t < v; });
  return it != snapshots.end() && it->t == t ? &*it : nullptr;
}

TrajectoryReport simulate(const OpinionState& initial, const SimulationOptions& options, const StepObserver& observer) {
  if (!(options.convergence_tol > 0.0)) throw ValidationError("convergence_tol must be positive");
  TrajectoryReport rep;
  rep.mode = options.mode;

  std::vector<double> x(initial.opinions().begin(), initial.opinions().end());
  ProximityDigraph current = build_digraph(initial, options.tie_tol);
  const ProximityDigraph frozen = current;
  rep.snapshots.push_back({0, x, current.fingerprint()});
  if (observer) observer(0, x);

  // Thinned steps beyond kFullSnapshotSteps: powers of two live in
  // `snapshots`, the most recent ones in `tail`.
  std::vector<Snapshot> tail;
  std::size_t t = 0;
  while (t < options.max_steps) {
    const auto& g = options.mode == Mode::Free ? current : frozen;
    std::vector<double> next = average(g, x);
    ++t;
    check_finite(next, t);
    rep.final_residual = max_abs_difference(next, x);
    x = std::move(next);
    if (options.mode == Mode::Free) {
      ProximityDigraph updated = build_digraph(initial.with_opinions(x), options.tie_tol);
      if (!(updated == current)) {
        rep.topology_changes.push_back(t - 1);
        current = std::move(updated);
      }
    }
    if (observer) observer(t, x);
    Snapshot snap{t, x, current.fingerprint()};
    if (keep_snapshot(t)) {
      rep.snapshots.push_back(std::move(snap));
    } else {
      tail.push_back(std::move(snap));
      if (tail.size() > 2 * kSnapshotTail) tail.erase(tail.begin(), tail.end() - static_cast<std::ptrdiff_t>(kSnapshotTail));
    }
    if (rep.final_residual <= options.convergence_tol) {
      rep.converged = true;
      break;
    }
  }
  rep.steps_run = t;
  if (tail.size() > kSnapshotTail) tail.erase(tail.begin(), tail.end() - static_cast<std::ptrdiff_t>(kSnapshotTail));
  for (auto& s : tail) {
    if (s.t > rep.snapshots.back().t) rep.snapshots.push_back(std::move(s));
  }
  rep.tau_candidate = rep.topology_changes.empty() ? 0 : rep.topology_changes.back() + 1;
  return rep;
}

std::optional<std::size_t> detect_tau(const TrajectoryReport& report, std::size_t stability_window) {
  if (stability_window == 0) throw ValidationError("stability_window must be positive");
  if (!report.converged || !report.tau_candidate) return std::nullopt;
  if (report.steps_run < *report.tau_candidate + stability_window) return std::nullopt;
  return report.tau_candidate;
}

OpinionState state_at_step(const OpinionState& initial, std::size_t t, double tie_tol) {
  OpinionState s = initial;
  for (std::size_t k = 0; k < t; ++k) {
    s = step(s, tie_tol);
    check_finite(s.opinions(), k + 1);
  }
  return s;
}

}  // namespace hthk
