#include "hthk/neighborhoods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hthk/error.hpp"
#include "hthk/fixed_topology.hpp"
#include "hthk/graph_structure.hpp"

namespace hthk {

namespace {

void require_compatible(const NeighborhoodSpec& spec, const OpinionState& y) {
  if (y.size() != spec.center.size()) throw ValidationError("dimension mismatch between state and neighborhood center");
  if (!std::equal(y.bounds().begin(), y.bounds().end(), spec.center.bounds().begin())) {
    throw ValidationError("state and neighborhood center carry different confidence bounds");
  }
}

bool inside_box(std::span<const double> radius, const OpinionState& center, const OpinionState& y) {
  for (Agent i = 0; i < y.size(); ++i) {
    const double dev = std::abs(y.opinion(i) - center.opinion(i));
    if (radius[i] > 0.0 ? !(dev < radius[i]) : dev != 0.0) return false;
  }
  return true;
}

}  // namespace

NeighborhoodSpec neighborhood_spec(const OpinionState& center, double tie_tol) {
  const std::size_t n = center.size();
  if (n < 2) throw ValidationError("equi-topology radii need at least two agents");
  const auto z = center.opinions();
  const auto r = center.bounds();

  std::vector<double> eps(n, std::numeric_limits<double>::infinity());
  for (Agent i = 0; i < n; ++i) {
    for (Agent j = 0; j < n; ++j) {
      if (i == j) continue;
      const double gap = std::abs(z[i] - z[j]);
      eps[i] = std::min({eps[i], std::abs(gap - r[i]), std::abs(gap - r[j])});
    }
    eps[i] *= 0.5;
  }

  // delta_i: minimum epsilon over every node with a path to i.
  const auto in = build_digraph(center, tie_tol).in_neighbors();
  std::vector<double> delta(n);
  std::vector<char> seen(n);
  std::vector<Agent> frontier;
  for (Agent i = 0; i < n; ++i) {
    std::fill(seen.begin(), seen.end(), 0);
    frontier.assign(1, i);
    seen[i] = 1;
    double m = eps[i];
    while (!frontier.empty()) {
      const Agent v = frontier.back();
      frontier.pop_back();
      for (Agent p : in[v]) {
        if (seen[p]) continue;
        seen[p] = 1;
        m = std::min(m, eps[p]);
        frontier.push_back(p);
      }
    }
    delta[i] = m;
  }
  return {center, std::move(eps), std::move(delta)};
}

bool in_equi_topology(const NeighborhoodSpec& spec, const OpinionState& y) {
  require_compatible(spec, y);
  return inside_box(spec.epsilon, spec.center, y);
}

bool in_invariant_equi_topology(const NeighborhoodSpec& spec, const OpinionState& y) {
  require_compatible(spec, y);
  return inside_box(spec.delta, spec.center, y);
}

Theorem1Report check_theorem1(const OpinionState& z, const OpinionState& y0, std::size_t horizon, double tie_tol) {
  Theorem1Report rep;
  if (z.size() < 2) return rep;
  const NeighborhoodSpec spec = neighborhood_spec(z, tie_tol);
  rep.applicable = is_equilibrium(z, kEquilibriumTol, tie_tol) && in_invariant_equi_topology(spec, y0);
  if (!rep.applicable) return rep;

  const ProximityDigraph z_graph = build_digraph(z, tie_tol);
  const bool z_has_moderate = analyze_structure(z_graph).has_class(ComponentClass::ModerateMinded);
  const auto target = fvct(y0, tie_tol).fvct;
  double scale = 1.0;
  for (double v : target) scale = std::max(scale, std::abs(v));
  const double slack = 1e-12 * scale;

  auto fail = [&](std::size_t t, const char* what) {
    rep.first_violation = t;
    rep.violation = what;
    rep.conclusions_verified = false;
    return rep;
  };

  OpinionState x = y0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t <= horizon; ++t) {
    if (!in_equi_topology(spec, x)) return fail(t, "left the equi-topology neighborhood");
    const ProximityDigraph g = build_digraph(x, tie_tol);
    if (!(g == z_graph)) return fail(t, "proximity digraph differs from that of the equilibrium");
    if (z_has_moderate) return fail(t, "moderate-minded component present");
    const double dist = max_abs_difference(x.opinions(), target);
    if (dist > previous + slack) return fail(t, "distance to fvct(x(0)) increased");
    previous = dist;
    if (t < horizon) x = x.with_opinions(average(g, x.opinions()));
  }
  rep.conclusions_verified = true;
  return rep;
}

}  // namespace hthk
