#pragma once

#include <string>
#include <vector>

#include "hthk/core_model.hpp"

namespace hthk {

inline constexpr double kStochasticTol = 1e-12;
inline constexpr double kLimitMatrixTol = 1e-9;

/// Structural properties every state must have: A(y) row stochastic with a
/// positive diagonal, an acyclic condensation, a sink SCC in every weak
/// component, rho(Theta) < 1 for every open-minded SCC, a row-stochastic M*
/// with identical rows inside each moderate block, and a one-step opinion
/// range that does not grow. Returns one message per violated property.
std::vector<std::string> structural_violations(const OpinionState& state, double tie_tol = 0.0);

}  // namespace hthk
