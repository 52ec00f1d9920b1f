#include "hthk/convergence_factors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hthk/error.hpp"

namespace hthk {

namespace {

// Largest power examined when a ratio endpoint sits extremely close to 1.
constexpr double kMaxPower = 1e15;
constexpr double kVanishingRatio = 1e-9;

int sign_of(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

std::optional<double> opt_min(std::optional<double> a, std::optional<double> b) {
  if (!a) return b;
  if (!b) return a;
  return std::min(*a, *b);
}

std::optional<double> opt_max(std::optional<double> a, std::optional<double> b) {
  if (!a) return b;
  if (!b) return a;
  return std::max(*a, *b);
}

// Closed real interval, endpoints may be infinite.
struct Range {
  double lo;
  double hi;
  double magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }
  double min_magnitude() const { return lo > 0.0 ? lo : (hi < 0.0 ? -hi : 0.0); }
};

double product(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

Range multiply(Range a, Range b) {
  const double p[4] = {product(a.lo, b.lo), product(a.lo, b.hi), product(a.hi, b.lo), product(a.hi, b.hi)};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

std::optional<Range> reciprocal(Range r) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (r.lo == 0.0 && r.hi == 0.0) return std::nullopt;
  if (r.lo > 0.0 || r.hi < 0.0) return Range{1.0 / r.hi, 1.0 / r.lo};
  if (r.lo == 0.0) return Range{1.0 / r.hi, inf};
  if (r.hi == 0.0) return Range{-inf, 1.0 / r.lo};
  return Range{-inf, inf};
}

Range power(Range r, std::size_t m) {
  if (m == 0) return {1.0, 1.0};
  const double e = static_cast<double>(m);
  const double a = std::pow(r.lo, e), b = std::pow(r.hi, e);
  if (m % 2 == 1 || r.lo >= 0.0) return {std::min(a, b), std::max(a, b)};
  if (r.hi <= 0.0) return {std::min(a, b), std::max(a, b)};
  return {0.0, std::max(a, b)};
}

double distance_to_one(Range r) {
  if (r.lo <= 1.0 && 1.0 <= r.hi) return 0.0;
  return std::min(std::abs(1.0 - r.lo), std::abs(1.0 - r.hi));
}

// min over m >= 0, alpha in [alpha], beta in [beta] of |1 - c (alpha/beta)^m|.
// Value of c q^m for large m when |q| is 0, 1 or infinite in the limit.
double limit_term(double c, double q, std::size_t m) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double mag = std::abs(q);
  const double sign = (c < 0.0) != (q < 0.0 && m % 2 == 1) ? -1.0 : 1.0;
  if (mag < 1.0) return 0.0;
  if (mag == 1.0) return sign * std::abs(c);
  return sign * inf;
}

double limit_distance(double c, Range q, std::size_t m) {
  const double a = limit_term(c, q.lo, m), b = limit_term(c, q.hi, m);
  Range r{std::min(a, b), std::max(a, b)};
  // Even powers of an interval around 0 reach down to 0.
  if (m % 2 == 0 && q.lo < 0.0 && q.hi > 0.0) r = c > 0.0 ? Range{0.0, r.hi} : Range{r.lo, 0.0};
  return distance_to_one(r);
}

double distance_at(double c, Range q, std::size_t m) { return distance_to_one(multiply({c, c}, power(q, m))); }

// Power past which every endpoint of c q^m lies within kVanishingRatio of its
// limit (0 or infinite magnitude).
std::size_t settle_power(double c, Range q) {
  double m = 4.0;
  for (double p : {q.lo, q.hi}) {
    const double mag = std::abs(p);
    if (mag == 0.0 || mag == 1.0 || std::isinf(mag)) continue;
    const double target = mag < 1.0 ? kVanishingRatio : 1.0 / kVanishingRatio;
    m = std::max(m, std::ceil(std::log(target / std::abs(c)) / std::log(mag)) + 2.0);
  }
  return static_cast<std::size_t>(std::min(m, kMaxPower));
}

// min over m >= 0, alpha in [alpha], beta in [beta] of |1 - c (alpha/beta)^m|.
//
// Over even m, and separately over odd m, both endpoints of {c q^m} move
// monotonically, so the distance of 1 to that interval is quasiconvex in m
// and its minimum is found by bisection. Powers beyond settle_power add only
// the limiting values.
double ratio_distance(double c, Range alpha, Range beta) {
  const auto inv_beta = reciprocal(beta);
  double best = distance_to_one({c, c});
  if (!inv_beta || best == 0.0) return best;
  const Range q = multiply(alpha, *inv_beta);
  const std::size_t last = settle_power(c, q);
  for (std::size_t parity = 0; parity < 2; ++parity) {
    const auto h = [&](std::size_t k) { return distance_at(c, q, 2 * k + parity); };
    std::size_t lo = 0, hi = (last - parity) / 2;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (h(mid) <= h(mid + 1)) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    best = std::min({best, h(lo), limit_distance(c, q, 2 * (last / 2 + 1) + parity)});
    if (best == 0.0) return 0.0;
  }
  return best;
}

}  // namespace

std::optional<double> ConvergenceFactors::k_min_pair(Agent i, Agent j) const {
  if (!k_min.at(i) || !k_min.at(j)) return std::nullopt;
  return std::min(*k_min[i], *k_min[j]);
}

std::optional<double> ConvergenceFactors::k_max_pair(Agent i, Agent j) const {
  if (!k_max.at(i) || !k_max.at(j)) return std::nullopt;
  return std::max(*k_max[i], *k_max[j]);
}

std::vector<std::vector<Agent>> open_successors(const StructureReport& structure) {
  const auto reach = reachable_sccs(structure);
  std::vector<std::vector<Agent>> per_scc(structure.sccs.size());
  for (std::size_t s = 0; s < structure.sccs.size(); ++s) {
    for (std::size_t t : reach[s]) {
      if (structure.class_of[t] != ComponentClass::OpenMinded) continue;
      per_scc[s].insert(per_scc[s].end(), structure.sccs[t].begin(), structure.sccs[t].end());
    }
    std::sort(per_scc[s].begin(), per_scc[s].end());
  }
  std::vector<std::vector<Agent>> out(structure.size());
  for (Agent i = 0; i < structure.size(); ++i) out[i] = per_scc[structure.scc_of[i]];
  return out;
}

std::vector<Agent> open_children(const ProximityDigraph& digraph, const StructureReport& structure, Agent i) {
  std::vector<Agent> out;
  for (Agent j : digraph.out_neighbors(i)) {
    if (structure.is_open(j)) out.push_back(j);
  }
  return out;
}

ConvergenceFactors convergence_factors(const FrozenTopology& topology, std::span<const double> y,
                                       double degenerate_tol) {
  ConvergenceFactors f;
  f.opinions.assign(y.begin(), y.end());
  f.next = topology.apply(y);
  f.fvct = topology.final_value(y);
  const std::size_t n = y.size();
  f.delta.resize(n);
  f.k.assign(n, std::nullopt);
  for (Agent i = 0; i < n; ++i) {
    f.delta[i] = y[i] - f.fvct[i];
    if (std::abs(f.delta[i]) > degenerate_tol) f.k[i] = (f.next[i] - f.fvct[i]) / f.delta[i];
  }

  const auto& structure = topology.structure();
  const auto successors = open_successors(structure);
  f.k_min.assign(n, std::nullopt);
  f.k_max.assign(n, std::nullopt);
  for (Agent i = 0; i < n; ++i) {
    if (!structure.is_open(i)) continue;
    for (Agent j : successors[i]) {
      f.k_min[i] = opt_min(f.k_min[i], f.k[j]);
      f.k_max[i] = opt_max(f.k_max[i], f.k[j]);
    }
  }
  return f;
}

ConvergenceFactors convergence_factors(const OpinionState& state, double tie_tol, double degenerate_tol) {
  const FrozenTopology topology(build_digraph(state, tie_tol));
  return convergence_factors(topology, state.opinions(), degenerate_tol);
}

bool is_monotone_step(const ConvergenceFactors& f, double tol) {
  for (Agent i = 0; i < f.opinions.size(); ++i) {
    const double x = f.opinions[i], xp = f.next[i], target = f.fvct[i];
    if (std::abs(x - target) <= tol) {
      if (std::abs(xp - target) > tol) return false;
    } else if (x < target) {
      if (xp < x - tol || xp > target + tol) return false;
    } else {
      if (xp > x + tol || xp < target - tol) return false;
    }
  }
  return true;
}

bool check_monotone_step(const OpinionState& state, double tie_tol) {
  return is_monotone_step(convergence_factors(state, tie_tol));
}

Lemma1Report check_lemma1(const OpinionState& state, double tie_tol, double degenerate_tol) {
  Lemma1Report rep;
  const FrozenTopology topology(build_digraph(state, tie_tol));
  const auto& structure = topology.structure();
  const auto& g = topology.digraph();
  if (structure.has_class(ComponentClass::ModerateMinded)) return rep;

  const auto now = convergence_factors(topology, state.opinions(), degenerate_tol);
  // The one-step identity is a weighted mean over every child with nonzero
  // Delta, closed-minded ones (k = 0) included, so their signs must agree too.
  for (Agent i = 0; i < state.size(); ++i) {
    if (!structure.is_open(i)) continue;
    const int si = sign_of(now.delta[i], degenerate_tol);
    for (Agent j : g.out_neighbors(i)) {
      if (si * sign_of(now.delta[j], degenerate_tol) < 0) return rep;
    }
  }
  rep.applicable = true;

  const auto after = convergence_factors(topology, now.next, degenerate_tol);
  rep.hull_respected = true;
  for (Agent i = 0; i < state.size(); ++i) {
    if (!structure.is_open(i) || !after.k[i]) continue;
    std::optional<double> lo, hi;
    for (Agent j : g.out_neighbors(i)) {
      lo = opt_min(lo, now.k[j]);
      hi = opt_max(hi, now.k[j]);
    }
    if (!lo) continue;
    const double k = *after.k[i];
    if (k < *lo - kHullSlack || k > *hi + kHullSlack) {
      rep.hull_respected = false;
      rep.first_violation = i;
      return rep;
    }
  }
  return rep;
}

double theorem2_condition5_bound(Agent i, Agent j, const ConvergenceFactors& f) {
  const auto kmax = f.k_max_pair(i, j);
  const auto kmin = f.k_min_pair(i, j);
  if (!kmax || !kmin) throw ValidationError("condition-5 bound needs k_min/k_max of both agents");
  if (f.delta.at(i) == 0.0 || f.delta.at(j) == 0.0) throw ValidationError("condition-5 bound needs nonzero Delta");
  const double prefactor = std::min(1.0 - *kmax, *kmin);
  const double c = f.delta[j] / f.delta[i];
  const double inner = ratio_distance(c, {*f.k_min[j], *f.k_max[j]}, {*f.k_min[i], *f.k_max[i]});
  return prefactor * inner;
}

Theorem2Report check_theorem2(const OpinionState& state, double tie_tol) {
  Theorem2Report rep;
  const FrozenTopology topology(build_digraph(state, tie_tol));
  const auto& structure = topology.structure();
  const auto& g = topology.digraph();
  const auto f = convergence_factors(topology, state.opinions());
  const std::size_t n = state.size();
  const auto y = state.opinions();

  rep.cond[0] = build_digraph(state.with_opinions(f.fvct), tie_tol) == g;

  rep.cond[1] = true;
  for (Agent i = 0; i < n && rep.cond[1]; ++i) {
    for (Agent j = 0; j < n; ++j) {
      if (y[i] >= y[j] && f.fvct[i] < f.fvct[j] - kMonotoneTol) {
        rep.cond[1] = false;
        break;
      }
    }
  }

  rep.cond[2] = is_monotone_step(f);

  rep.cond[3] = true;
  for (Agent i = 0; i < n && rep.cond[3]; ++i) {
    if (!structure.is_open(i)) continue;
    for (Agent j : g.out_neighbors(i)) {
      if (structure.is_open(j) && sign_of(f.delta[i], kDegenerateTol) * sign_of(f.delta[j], kDegenerateTol) < 0) {
        rep.cond[3] = false;
        break;
      }
    }
  }

  rep.cond[4] = true;
  std::vector<std::vector<Agent>> children(n);
  for (Agent i = 0; i < n; ++i) {
    if (structure.is_open(i)) children[i] = open_children(g, structure, i);
  }
  for (Agent a = 0; a < n && rep.cond[4]; ++a) {
    if (!structure.is_open(a) || !f.k[a]) continue;
    for (Agent b = a + 1; b < n; ++b) {
      if (!structure.is_open(b) || !f.k[b] || structure.wcc_of[a] != structure.wcc_of[b]) continue;
      bool ok;
      if (children[a] == children[b]) {
        ok = std::abs(*f.k[a] - *f.k[b]) <= kEqualFactorTol;
      } else {
        Agent i = a, j = b;
        if (std::abs(f.delta[j]) > std::abs(f.delta[i])) std::swap(i, j);
        if (f.delta[i] * f.delta[j] < 0.0 && !g.has_edge(i, j) && !g.has_edge(j, i)) ++rep.ambiguous_sign_pairs;
        const double lhs = *f.k_max_pair(i, j) - *f.k_min_pair(i, j);
        ok = lhs <= theorem2_condition5_bound(i, j, f) + kMonotoneTol;
      }
      if (!ok) {
        rep.cond[4] = false;
        rep.condition5_witness = std::make_pair(a, b);
        break;
      }
    }
  }

  rep.all_hold = std::all_of(rep.cond.begin(), rep.cond.end(), [](bool c) { return c; });
  return rep;
}

Theorem2ForwardReport verify_theorem2_forward(const OpinionState& state, std::size_t steps, double tie_tol) {
  Theorem2ForwardReport rep;
  const FrozenTopology topology(build_digraph(state, tie_tol));
  const auto& structure = topology.structure();
  const auto target = topology.final_value(state.opinions());
  const std::size_t n = state.size();

  double scale = 1.0;
  for (double v : state.opinions()) scale = std::max(scale, std::abs(v));
  const double slack = kMonotoneTol * scale;
  auto between = [&](double v, double a, double b) { return std::min(a, b) - slack <= v && v <= std::max(a, b) + slack; };

  std::vector<std::pair<Agent, Agent>> aligned;
  for (Agent i = 0; i < n; ++i) {
    for (Agent j = i + 1; j < n; ++j) {
      if (!structure.is_open(i) || !structure.is_open(j) || structure.wcc_of[i] != structure.wcc_of[j]) continue;
      const double di = state.opinion(i) - target[i], dj = state.opinion(j) - target[j];
      if (sign_of(di, kDegenerateTol) * sign_of(dj, kDegenerateTol) > 0) aligned.emplace_back(i, j);
    }
  }

  auto fail = [&](std::size_t t, bool& flag, const char* what) {
    flag = false;
    rep.first_violation = t;
    rep.violation = what;
    return rep;
  };

  std::vector<double> x(state.opinions().begin(), state.opinions().end());
  for (std::size_t t = 0; t < steps; ++t) {
    const ProximityDigraph g = build_digraph(state.with_opinions(x), tie_tol);
    if (!(g == topology.digraph())) return fail(t, rep.digraph_constant, "proximity digraph changed");
    const auto next = average(g, x);
    for (Agent i = 0; i < n; ++i) {
      if (!between(next[i], x[i], target[i])) return fail(t, rep.monotone, "opinion moved away from fvct(y)");
    }
    for (const auto& [i, j] : aligned) {
      if (!between(next[i] - next[j], x[i] - x[j], target[i] - target[j])) {
        return fail(t, rep.distance_bound, "pairwise difference left [fvct gap, current gap]");
      }
    }
    x = next;
    rep.steps = t + 1;
  }
  return rep;
}

}  // namespace hthk
