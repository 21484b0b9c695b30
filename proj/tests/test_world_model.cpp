#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "feps/free_energy.hpp"
#include "feps/world_model.hpp"
#include "test_util.hpp"

using namespace feps;
using Catch::Approx;

TEST_CASE("transition_probs normalizes h rows") {
  WorldModel m(1, 2, 1);
  m.h_prior[m.index(0, 0, 0)] = 2.0;
  m.h_prior[m.index(0, 0, 1)] = 6.0;
  const auto p = transition_probs(m, Table::prior, 0, 0);
  CHECK(p[0] == Approx(0.25));
  CHECK(p[1] == Approx(0.75));

  WorldModel u(3, 2, 1);  // uniform h row, N_B = 6
  const auto q = transition_probs(u, Table::prior, 0, 0);
  for (double v : q) CHECK(v == Approx(1.0 / 6.0));
}

TEST_CASE("transition_probs after a confidence-weighted reward") {
  // h(1) updated with f=4, R=3 on top of h0=1: row (13,1,1,1,1,1)
  WorldModel m(3, 2, 1);
  Trajectory traj;
  traj.push(0, 0, 1);
  for (int i = 0; i < 4; ++i) record_success(m, traj);
  distribute_rewards(m, traj);
  const auto p = transition_probs(m, Table::posterior, 0, 0);
  CHECK(p[1] == Approx(13.0 / 18.0));
}

TEST_CASE("degenerate transition row is an error") {
  WorldModel m(1, 2, 1);
  auto row = m.row(Table::prior, 0, 0);
  std::fill(row.begin(), row.end(), 0.0);
  CHECK_THROWS_WITH(transition_probs(m, Table::prior, 0, 0), "degenerate transition row");
}

TEST_CASE("sample_transition follows the prior row") {
  WorldModel m(2, 2, 1);
  auto row = m.row(Table::prior, 0, 0);
  std::fill(row.begin(), row.end(), 0.0);
  row[3] = 1.0;
  Rng rng(7);
  for (int i = 0; i < 50; ++i) CHECK(sample_transition(m, 0, 0, rng) == 3);

  // deterministic under a fixed seed
  WorldModel r = test::random_model(rng, 2, 2, 1);
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i)
    CHECK(sample_transition(r, 0, 0, a) == sample_transition(r, 0, 0, b));
}

TEST_CASE("sample_transition empirical frequencies") {
  WorldModel m(1, 2, 1);
  m.h_prior[m.index(0, 0, 0)] = 1.0;
  m.h_prior[m.index(0, 0, 1)] = 3.0;
  Rng rng(11);
  int count1 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) count1 += sample_transition(m, 0, 0, rng);
  CHECK(std::abs(count1 / static_cast<double>(n) - 0.75) < 0.01);
}

TEST_CASE("emitted_obs is the fixed block clone map") {
  WorldModel m(2, 2, 1);
  CHECK(m.emitted_obs(3) == 1);
  for (int b = 0; b < m.n_beliefs(); ++b) {
    CHECK(m.emitted_obs(b) >= 0);
    CHECK(m.emitted_obs(b) < m.n_obs);
  }
  for (int s = 0; s < m.n_obs; ++s)
    CHECK(m.clones_of(s).size() == static_cast<std::size_t>(m.n_clones));
}

TEST_CASE("record_success accumulates confidence over a trajectory") {
  WorldModel m(3, 2, 2);
  Trajectory traj;
  traj.push(0, 0, 1);
  traj.push(1, 1, 2);
  traj.push(2, 0, 3);
  record_success(m, traj);
  CHECK(m.confidence[m.index(2, 0, 3)] == 1);
  for (int i = 0; i < 3; ++i) record_success(m, traj);
  CHECK(m.confidence[m.index(0, 0, 1)] == 4);

  Trajectory empty;
  WorldModel before = m;
  record_success(m, empty);
  CHECK(m.confidence == before.confidence);
}

TEST_CASE("edge repeated in one trajectory counts per occurrence") {
  WorldModel m(3, 2, 2);
  Trajectory traj;
  traj.push(0, 0, 1);
  traj.push(1, 0, 0);
  traj.push(0, 0, 1);  // revisited edge
  record_success(m, traj);
  CHECK(m.confidence[m.index(0, 0, 1)] == 2);
  CHECK(m.confidence[m.index(1, 0, 0)] == 1);
}

TEST_CASE("distribute_rewards applies decay plus f*R") {
  WorldModel m(3, 2, 1);  // h0=1, gamma=0.001, R=3
  Trajectory traj;
  traj.push(0, 0, 1);
  for (int i = 0; i < 4; ++i) record_success(m, traj);
  distribute_rewards(m, traj);
  CHECK(m.h_posterior[m.index(0, 0, 1)] == Approx(13.0));
  CHECK(traj.empty());
  for (int c : m.confidence) CHECK(c == 0);

  // decay-only branch on an unvisited edge
  m.h_posterior[m.index(1, 0, 2)] = 13.0;
  Trajectory none;
  distribute_rewards(m, none);
  CHECK(m.h_posterior[m.index(1, 0, 2)] == Approx(12.988));

  // all-h0, zero-confidence model is a fixed point
  WorldModel fresh(3, 2, 1);
  WorldModel copy = fresh;
  Trajectory t2;
  distribute_rewards(fresh, t2);
  CHECK(fresh.h_posterior == copy.h_posterior);
}

TEST_CASE("sync_prior copies the posterior") {
  Rng rng(3);
  WorldModel m = test::random_model(rng, 2, 2, 2);
  sync_prior(m);
  for (int b = 0; b < m.n_beliefs(); ++b)
    for (int a = 0; a < m.n_actions; ++a) {
      const auto p = transition_probs(m, Table::prior, b, a);
      const auto q = transition_probs(m, Table::posterior, b, a);
      CHECK(p == q);
      CHECK(detail::kl_divergence(q, p) == 0.0);
    }
  WorldModel before = m;
  sync_prior(m);
  CHECK(m.h_prior == before.h_prior);
}

TEST_CASE("marginal_transition mixes action rows by the policy") {
  WorldModel m(2, 1, 2);
  std::fill(m.h_prior.begin(), m.h_prior.end(), 0.0);
  m.h_prior[m.index(0, 0, 0)] = 1.0;
  m.h_prior[m.index(0, 1, 1)] = 1.0;
  Policy uniform = Policy::uniform(2, 2);
  const auto r = marginal_transition(m, uniform, 0);
  CHECK(r[0] == Approx(0.5));
  CHECK(r[1] == Approx(0.5));

  Policy point = Policy::uniform(2, 2);
  point.row(0)[0] = 1.0;
  point.row(0)[1] = 0.0;
  const auto r2 = marginal_transition(m, point, 0);
  CHECK(r2[0] == Approx(1.0));
}

TEST_CASE("marginal_transition matches the brute-force sum") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    WorldModel m = test::random_model(rng, 3, 2, 3);
    Policy pol = test::random_policy(rng, m.n_beliefs(), m.n_actions);
    for (int b = 0; b < m.n_beliefs(); ++b) {
      const auto got = marginal_transition(m, pol, b);
      for (int k = 0; k < m.n_beliefs(); ++k) {
        double expect = 0.0;
        for (int a = 0; a < m.n_actions; ++a)
          expect += pol.row(b)[a] * transition_probs(m, Table::prior, b, a)[k];
        CHECK(got[k] == Approx(expect).margin(1e-12));
      }
      CHECK(std::accumulate(got.begin(), got.end(), 0.0) == Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("row stochasticity holds on random models") {
  Rng rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    WorldModel m = test::random_model(rng, 1 + sample_int(4, rng), 1 + sample_int(3, rng),
                                      1 + sample_int(4, rng));
    for (int b = 0; b < m.n_beliefs(); ++b)
      for (int a = 0; a < m.n_actions; ++a) {
        const auto p = transition_probs(m, Table::prior, b, a);
        CHECK(std::accumulate(p.begin(), p.end(), 0.0) == Approx(1.0).margin(1e-12));
      }
  }
}

TEST_CASE("forgetting contracts h toward h0 geometrically") {
  WorldModel m(2, 1, 1);
  const double h_start = 9.5;
  m.h_posterior[m.index(0, 0, 1)] = h_start;
  Trajectory none;
  for (int k = 1; k <= 100; ++k) {
    distribute_rewards(m, none);
    const double expect = m.h0 + std::pow(1.0 - m.gamma, k) * (h_start - m.h0);
    CHECK(m.h_posterior[m.index(0, 0, 1)] == Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("rewarded edges never fall below their decayed value") {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    WorldModel m = test::random_model(rng, 2, 2, 2);
    Trajectory traj;
    traj.push(0, 0, 1);
    traj.push(1, 1, 2);
    record_success(m, traj);
    const double before = m.h_posterior[m.index(0, 0, 1)];
    const double decayed = before - m.gamma * (before - m.h0);
    distribute_rewards(m, traj);
    CHECK(m.h_posterior[m.index(0, 0, 1)] >= decayed);
  }
}
