#include <doctest.h>

#include <random>

#include "hthk/convergence_factors.hpp"
#include "hthk/core_model.hpp"
#include "hthk/fixed_topology.hpp"
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

}  // namespace

TEST_CASE("factors of the three-agent example") {
  const auto f = convergence_factors(OpinionState({0, 0.6, 1}, {0.5, 1, 0.25}));
  CHECK(f.delta[0] == 0.0);
  CHECK(f.delta[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(f.delta[2] == 0.0);
  CHECK_FALSE(f.k[0].has_value());
  REQUIRE(f.k[1].has_value());
  CHECK(*f.k[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK_FALSE(f.k[2].has_value());
  CHECK(check_monotone_step(OpinionState({0, 0.6, 1}, {0.5, 1, 0.25})));

  const auto lemma = check_lemma1(OpinionState({0, 0.6, 1}, {0.5, 1, 0.25}));
  CHECK(lemma.applicable);
  CHECK(lemma.hull_respected);
  CHECK_FALSE(check_lemma1(OpinionState({0, 0.5, 1}, {0.6, 0.6, 0.6})).applicable);
}

TEST_CASE("closed-minded agents reach their mean in one step") {
  const auto f = convergence_factors(OpinionState({0.1, 0.2, 0.35, 3}, {0.5, 0.5, 0.5, 0.1}));
  for (int i = 0; i < 3; ++i) {
    REQUIRE(f.k[i].has_value());
    CHECK(*f.k[i] == 0.0);
  }
  CHECK_FALSE(f.k[3].has_value());
}

TEST_CASE("equilibria satisfy every theorem 2 condition") {
  const auto eq = check_theorem2(OpinionState({0, 0.5, 1}, {0.4, 1, 0.25}));
  CHECK(eq.all_hold);
  const auto cons = check_theorem2(OpinionState({1, 1, 1}, {0.2, 0.3, 0.4}));
  CHECK(cons.all_hold);
  CHECK(check_monotone_step(OpinionState({1, 1, 1}, {0.2, 0.3, 0.4})));
}

TEST_CASE("figure 3 state violates only condition 5") {
  OpinionState s = fig3_state();
  for (int t = 0; t <= 5; ++t) {
    const auto rep = check_theorem2(s);
    CHECK(rep.cond[0]);
    CHECK(rep.cond[1]);
    CHECK(rep.cond[2]);
    CHECK(rep.cond[3]);
    CHECK_FALSE(rep.cond[4]);
    s = step(s);
  }
  const auto f = convergence_factors(fig3_state());
  CHECK(*f.k[5] == doctest::Approx(1.0 / 3).epsilon(1e-3));
  CHECK(*f.k[6] == doctest::Approx(200.0 / 204).epsilon(1e-3));
}

TEST_CASE("condition 5 bound edge cases") {
  // Equal factors everywhere: both sides vanish on the left.
  ConvergenceFactors f;
  f.delta = {0.5, 0.25};
  f.k = {0.5, 0.5};
  f.k_min = {0.5, 0.5};
  f.k_max = {0.5, 0.5};
  CHECK(theorem2_condition5_bound(0, 1, f) >= 0.0);

  // A vanishing ratio with alpha < beta leaves the prefactor min(1 - k_max, k_min).
  f.delta = {1.0, 1e-14};
  f.k_min = {0.5, 0.2};
  f.k_max = {0.6, 0.3};
  CHECK(theorem2_condition5_bound(0, 1, f) == doctest::Approx(std::min(1 - 0.6, 0.2)).epsilon(1e-9));

  // When alpha / beta can exceed 1 the ratio eventually reaches 1 and the bound is 0.
  f.k_min = {0.2, 0.3};
  f.k_max = {0.4, 0.6};
  CHECK(theorem2_condition5_bound(0, 1, f) == 0.0);

  // alpha / beta just below 1 with a large ratio: the crossing sits far out in m.
  f.delta = {1.0, 0.5};
  f.k_min = {0.9, 0.9};
  f.k_max = {0.9000001, 0.9};
  const double near_one = theorem2_condition5_bound(0, 1, f);
  CHECK(near_one >= 0.0);
  CHECK(near_one <= 0.1 * 0.5 + 1e-12);

  f.k_min = {std::nullopt, 0.3};
  CHECK_THROWS(theorem2_condition5_bound(0, 1, f));
}

TEST_CASE("frozen factors match ratios of dense matrix powers") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + trial % 12;
    const auto rs = oracle::random_state(rng, n);
    const OpinionState st(rs.x, rs.r);
    const FrozenTopology topo(build_digraph(st));
    const auto a = oracle::averaging(oracle::neighbors(rs.x, rs.r));
    const auto lim = oracle::power_limit(a);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(rs.x.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd f = lim * x;
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXd next = a * x;
      std::vector<double> y(x.data(), x.data() + n);
      const auto cf = convergence_factors(topo, y);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = x(static_cast<Eigen::Index>(i)) - f(static_cast<Eigen::Index>(i));
        if (std::abs(d) > 1e-6 && cf.k[i]) {
          CHECK(*cf.k[i] == doctest::Approx((next(static_cast<Eigen::Index>(i)) - f(static_cast<Eigen::Index>(i))) / d).epsilon(1e-6));
        }
      }
      x = next;
    }
  }
}

TEST_CASE("randomized lemma 1 and theorem 2 implications") {
  std::mt19937_64 rng(31);
  int applicable = 0, all_hold = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 3 + trial % 10;
    const auto rs = oracle::random_state(rng, n, 0.05, 0.4);
    OpinionState s(rs.x, rs.r);
    for (int t = 0; t < 40; ++t) {
      const auto lemma = check_lemma1(s);
      if (lemma.applicable) {
        ++applicable;
        CHECK(lemma.hull_respected);
      }
      const auto f = convergence_factors(s);
      for (std::size_t i = 0; i < n; ++i) {
        if (f.k_min[i] && f.k_max[i]) CHECK(*f.k_min[i] <= *f.k_max[i]);
      }
      const auto thm = check_theorem2(s);
      if (thm.all_hold) {
        ++all_hold;
        const auto fwd = verify_theorem2_forward(s, 100);
        CHECK_MESSAGE(fwd.ok(), fwd.violation);
        break;
      }
      s = step(s);
    }
  }
  CHECK(applicable > 50);
  CHECK(all_hold > 50);
}
