#pragma once

#include <cstddef>
#include <random>

#include "hthk/core_model.hpp"

namespace hthk {

using Rng = std::mt19937_64;

struct SamplingRanges {
  double opinion_lo = 0.0;
  double opinion_hi = 1.0;
  double bound_lo = 0.02;
  double bound_hi = 0.4;
};

/// Opinions and bounds drawn independently and uniformly from `ranges`.
OpinionState random_state(Rng& rng, std::size_t n, const SamplingRanges& ranges = {});

/// Uniform opinions with one common bound drawn from the bound range.
OpinionState random_homogeneous_state(Rng& rng, std::size_t n, const SamplingRanges& ranges = {});

/// Minimum equi-topology radius accepted by `random_equilibrium`.
inline constexpr double kMinEquilibriumMargin = 1e-9;

/// An equilibrium obtained as fvct of the limit of a random trajectory, with
/// every equi-topology radius at least kMinEquilibriumMargin. Resamples until
/// one is found, up to `max_attempts`.
OpinionState random_equilibrium(Rng& rng, std::size_t n, const SamplingRanges& ranges = {},
                                std::size_t max_attempts = 1000);

}  // namespace hthk
