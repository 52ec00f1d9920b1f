#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "hthk/core_model.hpp"
#include "hthk/error.hpp"
#include "oracles.hpp"

using namespace hthk;

namespace {

std::vector<std::vector<Agent>> lists(const ProximityDigraph& g) { return g.adjacency(); }

}  // namespace

TEST_CASE("opinion state validation") {
  CHECK_THROWS_AS(OpinionState({}, {}), ValidationError);
  CHECK_THROWS_AS(OpinionState({0.0, 1.0}, {0.1}), ValidationError);
  CHECK_THROWS_AS(OpinionState({0.0, NAN}, {0.1, 0.1}), ValidationError);
  CHECK_THROWS_AS(OpinionState({0.0, 1.0}, {0.1, INFINITY}), ValidationError);
  CHECK_THROWS_WITH(OpinionState({0.0, 1.0}, {0.1, 0.0}), doctest::Contains("bounds must be strictly positive"));
  CHECK_NOTHROW(OpinionState({0.5}, {1.0}));
}

TEST_CASE("digraph of the three-agent example") {
  const OpinionState s({0, 0.6, 1}, {0.5, 1, 0.25});
  const auto g = build_digraph(s);
  CHECK(lists(g) == std::vector<std::vector<Agent>>{{0}, {0, 1, 2}, {2}});
  CHECK(g.edge_count() == 5);
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(0, 1));
}

TEST_CASE("digraph boundary and consensus cases") {
  CHECK(lists(build_digraph(OpinionState({0, 0.5}, {0.5, 0.1}))) == std::vector<std::vector<Agent>>{{0, 1}, {1}});
  const auto g = build_digraph(OpinionState({0.3, 0.3, 0.3}, {0.01, 0.2, 5}));
  for (Agent i = 0; i < 3; ++i) CHECK(g.out_neighbors(i).size() == 3);
  // tie_tol widens the test symmetrically around the bound
  CHECK(build_digraph(OpinionState({0, 0.5}, {0.49, 0.1}), 0.02).has_edge(0, 1));
  CHECK_THROWS_AS(build_digraph(OpinionState({0, 0.5}, {0.1, 0.1}), -0.2), ValidationError);
}

TEST_CASE("digraph construction rejects malformed adjacency") {
  CHECK_THROWS_AS(ProximityDigraph({{1}, {1}}), ValidationError);  // missing self-loop on 0
  CHECK_THROWS_AS(ProximityDigraph({{0, 3}, {1}}), ValidationError);
  const ProximityDigraph g({{1, 0, 1}, {1}});
  CHECK(lists(g) == std::vector<std::vector<Agent>>{{0, 1}, {1}});
}

TEST_CASE("fingerprints separate digraphs and agree on equal ones") {
  const ProximityDigraph a({{0, 1}, {1}});
  const ProximityDigraph b({{0}, {0, 1}});
  const ProximityDigraph c({{0, 1}, {1}});
  CHECK(a == c);
  CHECK(a.fingerprint() == c.fingerprint());
  CHECK_FALSE(a == b);
  CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("averaging matrix entries") {
  const auto a = build_matrix(build_digraph(OpinionState({0, 0.6, 1}, {0.5, 1, 0.25})));
  Eigen::Matrix3d expected;
  expected << 1, 0, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0, 1;
  CHECK((a.values() - expected).cwiseAbs().maxCoeff() == 0.0);
  const auto complete = build_matrix(build_digraph(OpinionState({1, 1, 1, 1}, {0.1, 0.1, 0.1, 0.1})));
  CHECK((complete.values().array() == 0.25).all());
  CHECK(build_matrix(build_digraph(OpinionState({2}, {1}))).values()(0, 0) == 1.0);
}

TEST_CASE("one step of the three-agent example") {
  const auto next = step(OpinionState({0, 0.6, 1}, {0.5, 1, 0.25}));
  CHECK(next.opinion(0) == 0.0);
  CHECK(next.opinion(1) == doctest::Approx(1.6 / 3).epsilon(1e-15));
  CHECK(next.opinion(2) == 1.0);
  CHECK(step(OpinionState({0.7, 0.7, 0.7}, {0.1, 0.2, 0.3})).opinions()[1] == 0.7);
  CHECK(step(OpinionState({-4.25}, {0.5})).opinion(0) == -4.25);
}

TEST_CASE("randomized core-model properties") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 25;
    const auto rs = oracle::random_state(rng, n);
    const OpinionState s(rs.x, rs.r);
    const auto g = build_digraph(s);
    const auto adj = oracle::neighbors(rs.x, rs.r);
    for (Agent i = 0; i < n; ++i) {
      CHECK(g.has_edge(i, i));
      for (Agent j = 0; j < n; ++j) CHECK(g.has_edge(i, j) == adj[i][j]);
    }
    const auto a = build_matrix(g).values();
    CHECK((a.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK((a.array() >= 0.0).all());
    CHECK((a - oracle::averaging(adj)).cwiseAbs().maxCoeff() == 0.0);

    const auto next = step(s);
    const auto x = next.opinions();
    const Eigen::VectorXd dense = a * Eigen::Map<const Eigen::VectorXd>(rs.x.data(), static_cast<Eigen::Index>(n));
    for (Agent i = 0; i < n; ++i) {
      CHECK(std::abs(x[i] - dense(static_cast<Eigen::Index>(i))) <= 1e-15);
      double lo = INFINITY, hi = -INFINITY;
      for (Agent j : g.out_neighbors(i)) {
        lo = std::min(lo, rs.x[j]);
        hi = std::max(hi, rs.x[j]);
      }
      CHECK(lo <= x[i]);
      CHECK(x[i] <= hi);
    }
    CHECK(next.bounds()[0] == rs.r[0]);

    // Relabeling commutes with build_digraph and step.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> px(n), pr(n);
    for (std::size_t k = 0; k < n; ++k) {
      px[k] = rs.x[perm[k]];
      pr[k] = rs.r[perm[k]];
    }
    const OpinionState ps(px, pr);
    const auto pg = build_digraph(ps);
    const auto pnext = step(ps);
    for (std::size_t a_ = 0; a_ < n; ++a_) {
      CHECK(std::abs(pnext.opinion(a_) - x[perm[a_]]) <= 1e-15);
      for (std::size_t b = 0; b < n; ++b) CHECK(pg.has_edge(a_, b) == g.has_edge(perm[a_], perm[b]));
    }

    // Translation by an exactly representable shift keeps all distances.
    std::vector<double> shifted(rs.x);
    for (auto& v : shifted) v += 8.0;
    const auto tnext = step(OpinionState(shifted, rs.r));
    for (Agent i = 0; i < n; ++i) CHECK(tnext.opinion(i) - 8.0 == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("agents with one neighbor set receive bit-identical opinions") {
  const OpinionState s({0.1, 0.3, 0.2, 0.25}, {1, 1, 1, 1});
  const auto next = step(s);
  CHECK(next.opinion(0) == next.opinion(1));
  CHECK(next.opinion(1) == next.opinion(2));
  CHECK(step(next) == next);
}
