#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "hthk/core_model.hpp"
#include "hthk/error.hpp"
#include "hthk/graph_structure.hpp"
#include "hthk/spectral.hpp"
#include "oracles.hpp"

using namespace hthk;

namespace {

StructureReport structure_of(const std::vector<double>& x, const std::vector<double>& r) {
  return analyze_structure(build_digraph(OpinionState(x, r)));
}

const std::vector<double> kFig1X{0.1, 0.24, 0.27, 0.3, 0.34, 0.37, 0.39, 0.4, 0.5, 0.6, 0.67, 0.68, 0.75, 0.85, 0.86, 0.87, 1};
const std::vector<double> kFig1R{0.5, 0.04, 0.04, 0.04, 0.031, 0.021, 0.011, 0.061, 0.25,
                                 0.01, 0.04, 0.03, 0.3, 0.07, 0.07, 0.07, 0.135};

}  // namespace

TEST_CASE("structure of the three-agent example") {
  const auto s = structure_of({0, 0.6, 1}, {0.5, 1, 0.25});
  CHECK(s.sccs == std::vector<std::vector<Agent>>{{0}, {1}, {2}});
  CHECK(s.agent_class(0) == ComponentClass::ClosedMinded);
  CHECK(s.agent_class(1) == ComponentClass::OpenMinded);
  CHECK(s.agent_class(2) == ComponentClass::ClosedMinded);
  CHECK(s.wccs.size() == 1);
  CHECK(s.canonical_perm == std::vector<Agent>{0, 2, 1});
}

TEST_CASE("complete and disjoint cliques") {
  const auto one = structure_of({0.2, 0.25, 0.3}, {0.5, 0.5, 0.5});
  CHECK(one.sccs.size() == 1);
  CHECK(one.class_of[0] == ComponentClass::ClosedMinded);
  const auto two = structure_of({0, 0.01, 5, 5.01}, {0.1, 0.1, 0.1, 0.1});
  CHECK(two.count(ComponentClass::ClosedMinded) == 2);
  CHECK(two.wccs.size() == 2);
  const auto blocks = canonical_decomposition(build_matrix(build_digraph(OpinionState({0, 0.01, 5, 5.01}, {0.1, 0.1, 0.1, 0.1}))), two);
  CHECK(blocks.closed_blocks.size() == 2);
  CHECK(blocks.n_open == 0);
}

TEST_CASE("figure 1 initial digraph has every component class") {
  const auto s = structure_of(kFig1X, kFig1R);
  CHECK(s.has_class(ComponentClass::ClosedMinded));
  CHECK(s.has_class(ComponentClass::ModerateMinded));
  CHECK(s.has_class(ComponentClass::OpenMinded));
}

TEST_CASE("canonical blocks of the three-agent example") {
  const OpinionState st({0, 0.6, 1}, {0.5, 1, 0.25});
  const auto a = build_matrix(build_digraph(st));
  const auto b = canonical_decomposition(a, analyze_structure(build_digraph(st)));
  CHECK(b.closed.rows() == 2);
  CHECK(b.closed.isIdentity());
  CHECK(b.moderate.rows() == 0);
  CHECK(b.theta.rows() == 1);
  CHECK(b.theta(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(b.theta_closed(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(b.theta_closed(0, 1) == doctest::Approx(1.0 / 3));
}

TEST_CASE("wcc ranges") {
  const OpinionState single({0.3}, {0.1});
  const auto r1 = wcc_ranges(single, analyze_structure(build_digraph(single)));
  REQUIRE(r1.size() == 1);
  CHECK(r1[0].opinion_range == Interval{0.3, 0.3});
  CHECK(r1[0].sensing_range.size() == 1);
  CHECK(r1[0].sensing_range[0].lo == doctest::Approx(0.2));
  CHECK(r1[0].sensing_range[0].hi == doctest::Approx(0.4));

  const OpinionState pair({0, 1}, {0.2, 0.2});
  const auto r2 = wcc_ranges(pair, analyze_structure(build_digraph(pair)));
  REQUIRE(r2.size() == 2);
  CHECK(r2[0].opinion_range == Interval{0, 0});
  CHECK(r2[0].sensing_range == std::vector<Interval>{{-0.2, 0.2}});
  CHECK(r2[1].opinion_range == Interval{1, 1});
  CHECK(r2[1].sensing_range == std::vector<Interval>{{0.8, 1.2}});
  CHECK_FALSE(intersects(r2[0].sensing_range, r2[1].opinion_range));
}

TEST_CASE("interval unions merge touching parts") {
  const auto u = normalize_union({{2, 3}, {0, 1}, {1, 1.5}, {2.5, 2.7}});
  CHECK(u == std::vector<Interval>{{0, 1.5}, {2, 3}});
  CHECK(intersects(u, {1.5, 1.8}));
  CHECK_FALSE(intersects(u, {1.6, 1.9}));
}

TEST_CASE("randomized structure against the closure oracle") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + trial % 30;
    const auto rs = oracle::random_state(rng, n, 0.01, 0.3);
    const OpinionState st(rs.x, rs.r);
    const auto g = build_digraph(st);
    const auto s = analyze_structure(g);
    const auto adj = oracle::neighbors(rs.x, rs.r);
    const auto reach = oracle::closure(adj);
    const auto kinds = oracle::classes(adj);

    std::set<Agent> seen;
    for (std::size_t k = 0; k < s.sccs.size(); ++k) {
      for (Agent i : s.sccs[k]) {
        CHECK(seen.insert(i).second);
        CHECK(s.scc_of[i] == k);
      }
    }
    CHECK(seen.size() == n);
    for (Agent i = 0; i < n; ++i) {
      for (Agent j = 0; j < n; ++j) CHECK((s.scc_of[i] == s.scc_of[j]) == (reach[i][j] && reach[j][i]));
      const auto expect = kinds[i] == oracle::Kind::Closed     ? ComponentClass::ClosedMinded
                          : kinds[i] == oracle::Kind::Moderate ? ComponentClass::ModerateMinded
                                                               : ComponentClass::OpenMinded;
      CHECK(s.agent_class(i) == expect);
      // Essential nodes: every successor is also a predecessor.
      bool essential = true;
      for (Agent j = 0; j < n; ++j) {
        if (reach[i][j] && !reach[j][i]) essential = false;
      }
      CHECK(essential == !s.is_open(i));
    }
    for (std::size_t k = 0; k < s.sccs.size(); ++k) {
      if (s.sccs[k].size() == 1 && s.is_sink(k)) CHECK(s.class_of[k] == ComponentClass::ClosedMinded);
    }
    for (const auto& w : s.wccs) {
      CHECK(std::any_of(w.begin(), w.end(), [&](Agent i) { return s.is_sink(s.scc_of[i]); }));
    }

    const auto a = build_matrix(g);
    const auto blocks = canonical_decomposition(a, s);
    Eigen::MatrixXd permuted(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) permuted(r, c) = a(blocks.perm[r], blocks.perm[c]);
    }
    CHECK((blocks.assemble() - permuted).cwiseAbs().maxCoeff() == 0.0);
    // Lower block triangular: no canonical row reaches a later column.
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = r + 1; c < n; ++c) {
        if (permuted(r, c) != 0.0) CHECK(s.scc_of[blocks.perm[r]] == s.scc_of[blocks.perm[c]]);
      }
    }
    for (const auto& b : blocks.closed_blocks) {
      const auto blk = blocks.closed.block(b.offset, b.offset, b.size, b.size);
      CHECK((blk.array() == 1.0 / static_cast<double>(b.size)).all());
    }
    if (blocks.n_open > 0) CHECK(spectral_radius(blocks.theta).value < 1.0 - 1e-9);
  }
}

TEST_CASE("canonical decomposition rejects mismatched inputs") {
  const OpinionState a({0, 0.6, 1}, {0.5, 1, 0.25});
  const OpinionState b({0, 0.6, 1}, {0.7, 1, 0.25});
  CHECK_THROWS(canonical_decomposition(build_matrix(build_digraph(b)), analyze_structure(build_digraph(a))));
}
