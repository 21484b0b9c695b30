#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "feps/environment.hpp"

using namespace feps;
using namespace feps::timed_response;

TEST_CASE("timed response resets to E0") {
  Environment env(make_timed_response());
  Rng rng(0);
  const auto [state, obs] = env.reset(rng);
  CHECK(state == kE0);
  CHECK(obs == kObsOffHungry);
}

TEST_CASE("timed response transitions") {
  const EnvSpec e = make_timed_response();
  CHECK(e.next(kE2, kPress) == kE0Prime);
  CHECK(e.emit(kE0Prime) == kObsOffSatiated);
  CHECK(e.next(kE1, kPress) == kE0);
  CHECK(e.next(kE0, kWait) == kE1);
  CHECK(e.next(kE0, kPress) == kE1);  // light turns on regardless
  CHECK(e.next(kE2, kWait) == kE0);
  CHECK(e.next(kE0Prime, kWait) == kE0);
  CHECK(e.next(kE0Prime, kPress) == kE0);
}

TEST_CASE("wait-wait-press is the unique 3-step path to satiation") {
  const EnvSpec e = make_timed_response();
  int winners = 0;
  for (int bits = 0; bits < 8; ++bits) {
    HiddenId s = kE0;
    bool satiated = false;
    for (int step = 0; step < 3; ++step) {
      s = e.next(s, (bits >> step) & 1);
      if (e.emit(s) == kObsOffSatiated) satiated = true;
    }
    if (satiated) {
      ++winners;
      CHECK(((bits >> 1) & 1) == kWait);   // must wait at E1
      CHECK(((bits >> 2) & 1) == kPress);  // press at E2
    }
  }
  CHECK(winners == 2);  // first action is irrelevant

  // pressing one step early returns to E0
  CHECK(e.next(e.next(kE0, kWait), kPress) == kE0);
}

TEST_CASE("grid emission bands") {
  CHECK(grid_emission(2, 2) == 3);
  CHECK(grid_emission(0, 0) == 0);
  CHECK(grid_emission(1, 2) == 2);
  CHECK(grid_emission(2, 1) == 2);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) CHECK(grid_emission(x, y) == grid_emission(y, x));
}

TEST_CASE("grid observation partition is {3,3,2,1}") {
  const EnvSpec e = make_grid();
  std::array<int, 4> counts{};
  for (int c = 0; c < e.n_hidden; ++c) ++counts[e.emit(c)];
  CHECK(counts == std::array<int, 4>{3, 3, 2, 1});
}

TEST_CASE("grid moves clamp at the boundary") {
  const EnvSpec e = make_grid();
  const HiddenId corner = grid::cell_index(2, 2);
  CHECK(e.next(corner, grid::kUp) == corner);
  CHECK(e.emit(corner) == 3);
  CHECK(e.next(grid::cell_index(0, 0), grid::kLeft) == grid::cell_index(0, 0));
  CHECK(e.next(grid::cell_index(1, 1), grid::kRight) == grid::cell_index(2, 1));
}

TEST_CASE("grid reset: fixed start and random-start frequencies") {
  Environment env(make_grid());
  Rng rng(0);
  const auto [state, obs] = env.reset(rng);
  CHECK(state == grid::cell_index(0, 0));
  CHECK(obs == 0);

  std::array<int, 9> counts{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[env.reset(rng, true).first];
  for (int c = 0; c < 9; ++c)
    CHECK(std::abs(counts[c] / static_cast<double>(n) - 1.0 / 9.0) < 0.02);
}

TEST_CASE("env_step is deterministic") {
  const EnvSpec e = make_grid();
  for (int s = 0; s < e.n_hidden; ++s)
    for (int a = 0; a < e.n_actions; ++a) CHECK(e.next(s, a) == e.next(s, a));
}

TEST_CASE("optimal_steps BFS oracle") {
  const EnvSpec e = make_grid();
  CHECK(optimal_steps(e, grid::cell_index(0, 0), 3) == 4);
  CHECK(optimal_steps(e, grid::cell_index(1, 2), 3) == 1);
  CHECK(optimal_steps(e, grid::cell_index(2, 2), 3) == 0);
  // obs 0 covers every cell at smell distance >= 3; (0,1) and (1,0) are
  // 3 moves from the corner
  CHECK(optimal_steps(e, grid::cell_index(2, 2), 0) == 3);
}
