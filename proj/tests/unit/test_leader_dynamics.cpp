#include <doctest.h>

#include <random>

#include "hthk/core_model.hpp"
#include "hthk/graph_structure.hpp"
#include "hthk/leader_dynamics.hpp"
#include "hthk/simulator.hpp"
#include "oracles.hpp"

using namespace hthk;

namespace {

OpinionState fig3_state() {
  std::vector<double> x{0, 2.2, 4, 4, 4, 0.64};
  std::vector<double> r{0.01, 0.01, 0.01, 0.01, 0.01, 1.9254};
  x.insert(x.end(), 200, 3.0);
  r.insert(r.end(), 200, 2.0);
  return OpinionState(x, r);
}

LeaderReport leaders_of(const OpinionState& s) {
  const auto g = build_digraph(s);
  return leader_report(build_matrix(g), analyze_structure(g));
}

}  // namespace

TEST_CASE("leaders of the figure 3 state") {
  const auto rep = leaders_of(fig3_state());
  REQUIRE(rep.entries.size() == 2);
  CHECK(*rep.rho[rep.entries[0].scc] == doctest::Approx(0.3333).epsilon(1e-3));
  CHECK(*rep.rho[rep.entries[1].scc] == doctest::Approx(0.9804).epsilon(1e-3));
  for (const auto& e : rep.entries) CHECK(e.leader == e.scc);
}

TEST_CASE("leaders of small examples") {
  const auto ex2 = leaders_of(OpinionState({0, 0.6, 1}, {0.5, 1, 0.25}));
  REQUIRE(ex2.entries.size() == 1);
  CHECK(ex2.entries[0].leader == ex2.entries[0].scc);
  CHECK(*ex2.rho[ex2.entries[0].scc] == doctest::Approx(1.0 / 3));

  // Agent 1 sees agents 2 and 3; agent 2 sees only agent 3.
  const auto chain = leaders_of(OpinionState({0, 1.5, 2}, {2, 0.6, 0.1}));
  REQUIRE(chain.entries.size() == 2);
  const auto* first = chain.entry_for(0);
  REQUIRE(first != nullptr);
  CHECK(*chain.rho[0] == doctest::Approx(1.0 / 3));
  CHECK(*chain.rho[1] == doctest::Approx(0.5));
  CHECK(first->leader == 1);
  CHECK_FALSE(first->tie);
}

TEST_CASE("leader ties prefer the SCC itself") {
  // Two singleton open SCCs with two neighbors each, the first feeding the second.
  const auto rep = leaders_of(OpinionState({0, 1, 1.4}, {1, 0.5, 0.1}));
  const auto* e = rep.entry_for(0);
  REQUIRE(e != nullptr);
  CHECK(e->tie);
  CHECK(e->leader == 0);
}

TEST_CASE("randomized leader invariants") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 20;
    const auto rs = oracle::random_state(rng, n);
    const auto g = build_digraph(OpinionState(rs.x, rs.r));
    const auto s = analyze_structure(g);
    const auto rep = leader_report(build_matrix(g), s);
    for (const auto& e : rep.entries) {
      CHECK(std::find(e.successors.begin(), e.successors.end(), e.scc) != e.successors.end());
      double best = 0.0;
      for (std::size_t t : e.successors) best = std::max(best, *rep.rho[t]);
      CHECK(*rep.rho[e.leader] >= best - kLeaderTieTol);
      CHECK(*rep.rho[e.scc] > 0.0);
      CHECK(*rep.rho[e.scc] < 1.0);
    }
  }
}

TEST_CASE("theorem 3 on the reference scenarios") {
  const auto ex2 = check_theorem3(OpinionState({0, 0.6, 1}, {0.5, 1, 0.25}), 200);
  CHECK(ex2.fvct_constant);
  CHECK(ex2.no_moderate);
  REQUIRE(ex2.k_limits.size() == 1);
  CHECK(ex2.k_limits[0].agent == 1);
  CHECK(ex2.k_limits[0].verdict == Verdict::Holds);
  CHECK(*ex2.k_limits[0].final_k == doctest::Approx(1.0 / 3).epsilon(1e-9));

  const auto fig3 = check_theorem3(fig3_state(), 2000);
  CHECK(fig3.status == Verdict::Holds);
  CHECK(fig3.k_limits.size() == 201);

  const auto eq = check_theorem3(OpinionState({0, 0.5, 1}, {0.4, 1, 0.25}), 100);
  CHECK(eq.k_limits.empty());
  CHECK(eq.fvct_constant);
  CHECK(eq.status == Verdict::Holds);
  CHECK_THROWS(check_theorem3(OpinionState({0, 1}, {1, 1}), 0));
}

TEST_CASE("followers of a faster leader take its direction") {
  // Agent 1 (rho 1/3) follows agent 2 (rho 1/2), which feeds the closed agent 3.
  const OpinionState s({0, 1.5, 2}, {2, 0.6, 0.1});
  const auto rep = check_theorem3(s, 500);
  REQUIRE(rep.directions.size() == 1);
  CHECK(rep.directions[0].verdict == Verdict::Holds);
  CHECK(rep.direction_entrained);
  for (const auto& k : rep.k_limits) CHECK(k.verdict == Verdict::Holds);
}
