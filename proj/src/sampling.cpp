#include "hthk/sampling.hpp"

#include <algorithm>

#include "hthk/error.hpp"
#include "hthk/fixed_topology.hpp"
#include "hthk/neighborhoods.hpp"
#include "hthk/simulator.hpp"

namespace hthk {

OpinionState random_state(Rng& rng, std::size_t n, const SamplingRanges& ranges) {
  std::uniform_real_distribution<double> op(ranges.opinion_lo, ranges.opinion_hi);
  std::uniform_real_distribution<double> bd(ranges.bound_lo, ranges.bound_hi);
  std::vector<double> x(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = op(rng);
    r[i] = bd(rng);
  }
  return OpinionState(std::move(x), std::move(r));
}

OpinionState random_homogeneous_state(Rng& rng, std::size_t n, const SamplingRanges& ranges) {
  std::uniform_real_distribution<double> op(ranges.opinion_lo, ranges.opinion_hi);
  std::uniform_real_distribution<double> bd(ranges.bound_lo, ranges.bound_hi);
  std::vector<double> x(n);
  for (auto& v : x) v = op(rng);
  return OpinionState(std::move(x), std::vector<double>(n, bd(rng)));
}

OpinionState random_equilibrium(Rng& rng, std::size_t n, const SamplingRanges& ranges, std::size_t max_attempts) {
  if (n < 2) throw ValidationError("random_equilibrium needs at least two agents");
  SimulationOptions opts;
  opts.max_steps = 20000;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    const OpinionState start = random_state(rng, n, ranges);
    const auto traj = simulate(start, opts);
    if (!traj.converged) continue;
    const auto limit = start.with_opinions(traj.final_snapshot().opinions);
    const OpinionState z = limit.with_opinions(fvct(limit).fvct);
    if (!is_equilibrium(z)) continue;
    const auto spec = neighborhood_spec(z);
    if (std::all_of(spec.epsilon.begin(), spec.epsilon.end(), [](double e) { return e >= kMinEquilibriumMargin; })) return z;
  }
  throw ConvergenceError("no equilibrium with a usable margin found");
}

}  // namespace hthk
