#include <doctest.h>

#include <chrono>
#include <random>

#include "hthk/core_model.hpp"
#include "hthk/error.hpp"
#include "hthk/fixed_topology.hpp"
#include "hthk/sampling.hpp"
#include "hthk/simulator.hpp"
#include "oracles.hpp"

using namespace hthk;

TEST_CASE("three-agent example converges with constant topology") {
  const OpinionState s({0, 0.6, 1}, {0.5, 1, 0.25});
  const auto rep = simulate(s);
  CHECK(rep.converged);
  CHECK(rep.tau_candidate == 0u);
  CHECK(rep.topology_changes.empty());
  CHECK(rep.final_residual <= 1e-12);
  CHECK(max_abs_difference(rep.final_snapshot().opinions, std::vector<double>{0, 0.5, 1}) <= 1e-11);
  CHECK(rep.snapshots.size() == rep.steps_run + 1);
}

TEST_CASE("detect_tau certificates") {
  const OpinionState eq({0, 0.5, 1}, {0.4, 1, 0.25});
  const auto rep = simulate(eq);
  CHECK(rep.steps_run == 1);
  CHECK(detect_tau(rep, 1) == 0u);
  CHECK_FALSE(detect_tau(rep, 100).has_value());

  SimulationOptions short_run;
  short_run.max_steps = 3;
  const auto cut = simulate(OpinionState({0.1, 0.24, 0.27, 0.5}, {0.2, 0.04, 0.04, 0.3}), short_run);
  CHECK_FALSE(cut.converged);
  CHECK_FALSE(detect_tau(cut, 1).has_value());
  CHECK_THROWS(detect_tau(rep, 0));
  SimulationOptions bad;
  bad.convergence_tol = 0.0;
  CHECK_THROWS_AS(simulate(eq, bad), ValidationError);
}

TEST_CASE("figure 1 scenario runs quickly and stays deterministic") {
  const OpinionState s({0.1, 0.24, 0.27, 0.3, 0.34, 0.37, 0.39, 0.4, 0.5, 0.6, 0.67, 0.68, 0.75, 0.85, 0.86, 0.87, 1},
                       {0.5, 0.04, 0.04, 0.04, 0.031, 0.021, 0.011, 0.061, 0.25, 0.01, 0.04, 0.03, 0.3, 0.07, 0.07, 0.07, 0.135});
  const auto start = std::chrono::steady_clock::now();
  const auto a = simulate(s);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));
  const auto b = simulate(s);
  CHECK(a.converged);
  CHECK(a.topology_changes == b.topology_changes);
  CHECK(a.final_snapshot().opinions == b.final_snapshot().opinions);
  for (std::size_t k = 1; k < a.topology_changes.size(); ++k) CHECK(a.topology_changes[k - 1] < a.topology_changes[k]);
  CHECK(*a.tau_candidate == a.topology_changes.back() + 1);
}

TEST_CASE("randomized trajectory properties") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + trial % 20;
    const auto rs = oracle::random_state(rng, n);
    const OpinionState s(rs.x, rs.r);
    SimulationOptions free_opts;
    free_opts.max_steps = 5000;
    const auto free_run = simulate(s, free_opts);
    SimulationOptions frozen_opts = free_opts;
    frozen_opts.mode = Mode::Frozen;
    const auto frozen_run = simulate(s, frozen_opts);

    if (free_run.converged) CHECK(free_run.final_residual <= free_opts.convergence_tol);
    CHECK(frozen_run.topology_changes.empty());
    // Free and frozen agree until the first topology change.
    const std::size_t agree = free_run.topology_changes.empty() ? free_run.steps_run : free_run.topology_changes.front() + 1;
    for (std::size_t t = 0; t <= std::min(agree, frozen_run.steps_run); ++t) {
      const auto* fs = free_run.at(t);
      const auto* zs = frozen_run.at(t);
      if (fs && zs) CHECK(fs->opinions == zs->opinions);
    }
    for (std::size_t k = 1; k < free_run.snapshots.size(); ++k) {
      const auto& p = free_run.snapshots[k - 1].opinions;
      const auto& q = free_run.snapshots[k].opinions;
      CHECK(*std::min_element(q.begin(), q.end()) >= *std::min_element(p.begin(), p.end()));
      CHECK(*std::max_element(q.begin(), q.end()) <= *std::max_element(p.begin(), p.end()));
    }
    if (frozen_run.converged) {
      // A step delta of tol leaves up to tol / (1 - lambda_2) to the limit.
      const double gap = 1.0 - oracle::subdominant_modulus(oracle::averaging(oracle::neighbors(rs.x, rs.r)));
      const double bound = 10 * free_opts.convergence_tol * std::max(1.0, 1.0 / gap);
      CHECK(max_abs_difference(frozen_run.final_snapshot().opinions, fvct(s).fvct) <= bound);
    }
  }
}

TEST_CASE("long runs keep thinned snapshots and exact change lists") {
  // A 50-agent open cluster drains geometrically (rate 50/51) into a closed
  // agent at 0, so the frozen run needs far more than kFullSnapshotSteps.
  std::vector<double> x(50, 0.4), r(50, 0.5);
  x.push_back(0.0);
  r.push_back(0.01);
  SimulationOptions opts;
  opts.convergence_tol = 1e-300;
  opts.max_steps = 20000;
  opts.mode = Mode::Frozen;
  std::size_t observed = 0;
  const auto rep = simulate(OpinionState(x, r), opts, [&](std::size_t, std::span<const double>) { ++observed; });
  CHECK(rep.steps_run == 20000);
  CHECK(observed == rep.steps_run + 1);
  CHECK(rep.at(0) != nullptr);
  CHECK(rep.at(kFullSnapshotSteps) != nullptr);
  CHECK(rep.at(16384) != nullptr);
  CHECK(rep.at(12345) == nullptr);
  CHECK(rep.final_snapshot().t == rep.steps_run);
  CHECK(rep.snapshots.size() < kFullSnapshotSteps + kSnapshotTail + 10);
  for (std::size_t k = 1; k < rep.snapshots.size(); ++k) CHECK(rep.snapshots[k - 1].t < rep.snapshots[k].t);
}

TEST_CASE("state replay") {
  const OpinionState s({0, 0.6, 1}, {0.5, 1, 0.25});
  CHECK(state_at_step(s, 0) == s);
  CHECK(state_at_step(s, 2) == step(step(s)));
}

TEST_CASE("homogeneous bounds reach an exact fixed point") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_homogeneous_state(rng, 2 + static_cast<std::size_t>(trial) % 40);
    SimulationOptions opts;
    opts.convergence_tol = std::numeric_limits<double>::denorm_min();
    const auto rep = simulate(s, opts);
    CHECK(rep.converged);
    CHECK(rep.final_residual == 0.0);
  }
}
