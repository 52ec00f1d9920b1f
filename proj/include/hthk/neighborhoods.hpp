#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hthk/core_model.hpp"

namespace hthk {

/// Radii of the equi-topology box (epsilon) and of the invariant box (delta)
/// around a center state.
struct NeighborhoodSpec {
  OpinionState center;
  std::vector<double> epsilon;
  std::vector<double> delta;
};

/// epsilon_i = 0.5 min_{j != i, R in {r_i, r_j}} | |z_i - z_j| - R |,
/// delta_i = min of epsilon_j over the predecessors j of i (i included).
/// Requires at least two agents.
NeighborhoodSpec neighborhood_spec(const OpinionState& center, double tie_tol = 0.0);

/// |y_i - z_i| < epsilon_i where epsilon_i > 0, y_i == z_i where epsilon_i == 0.
bool in_equi_topology(const NeighborhoodSpec& spec, const OpinionState& y);
/// Same test with delta in place of epsilon.
bool in_invariant_equi_topology(const NeighborhoodSpec& spec, const OpinionState& y);

struct Theorem1Report {
  bool applicable = false;
  bool conclusions_verified = false;
  std::optional<std::size_t> first_violation;
  std::string violation;  // which conclusion failed first, empty if none
};

/// Simulates y0 for `horizon` steps when z is an equilibrium and y0 lies in
/// the invariant equi-topology box of z, checking containment in the
/// equi-topology box, G_r(x(t)) == G_r(z), absence of moderate-minded
/// components and a non-increasing sup-distance to fvct(y0).
Theorem1Report check_theorem1(const OpinionState& z, const OpinionState& y0, std::size_t horizon,
                              double tie_tol = 0.0);

}  // namespace hthk
