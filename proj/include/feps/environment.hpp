#pragma once

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

#include "feps/rng.hpp"

namespace feps {

using HiddenId = int;

// Deterministic hidden-state machine: total transition and emission maps.
struct EnvSpec {
  std::string name;
  int n_hidden = 0;
  int n_obs = 0;
  int n_actions = 0;
  std::vector<HiddenId> transition;  // [state][action]
  std::vector<int> emission;         // [state] -> obs
  HiddenId start = 0;

  HiddenId next(HiddenId s, int a) const { return transition[s * n_actions + a]; }
  int emit(HiddenId s) const { return emission[s]; }
};

// Timed response task. Hidden states E0, E1, E2, E0'; observations
// (off,hungry)=0, (off,satiated)=1, (on,hungry)=2; actions wait=0, press=1.
// E1 and E2 both emit the ambiguous (on,hungry).
namespace timed_response {
inline constexpr HiddenId kE0 = 0, kE1 = 1, kE2 = 2, kE0Prime = 3;
inline constexpr int kObsOffHungry = 0, kObsOffSatiated = 1, kObsOnHungry = 2;
inline constexpr int kWait = 0, kPress = 1;
}  // namespace timed_response

inline EnvSpec make_timed_response() {
  using namespace timed_response;
  EnvSpec e;
  e.name = "timed_response";
  e.n_hidden = 4;
  e.n_obs = 3;
  e.n_actions = 2;
  e.transition.assign(8, kE0);
  e.transition[kE0 * 2 + kWait] = kE1;   // light turns on regardless
  e.transition[kE0 * 2 + kPress] = kE1;
  e.transition[kE1 * 2 + kWait] = kE2;
  e.transition[kE1 * 2 + kPress] = kE0;  // pressed too early
  e.transition[kE2 * 2 + kWait] = kE0;   // missed the window
  e.transition[kE2 * 2 + kPress] = kE0Prime;
  e.transition[kE0Prime * 2 + kWait] = kE0;  // hunger returns
  e.transition[kE0Prime * 2 + kPress] = kE0;
  e.emission = {kObsOffHungry, kObsOnHungry, kObsOnHungry, kObsOffSatiated};
  e.start = kE0;
  return e;
}

// 3x3 grid with food in the upper-right corner. Observations are smell
// intensities 0..3; moving off-grid leaves the cell unchanged.
namespace grid {
inline constexpr int kSize = 3;
inline constexpr int kFoodX = 2, kFoodY = 2;
inline constexpr int kRight = 0, kLeft = 1, kUp = 2, kDown = 3;

inline int cell_index(int x, int y) { return y * kSize + x; }
inline int cell_x(HiddenId c) { return c % kSize; }
inline int cell_y(HiddenId c) { return c / kSize; }
}  // namespace grid

inline int grid_emission(int x, int y) {
  const int dist = std::abs(grid::kFoodX - x) + std::abs(grid::kFoodY - y);
  return 3 - std::min(dist, 3);
}

inline EnvSpec make_grid() {
  using namespace grid;
  EnvSpec e;
  e.name = "grid";
  e.n_hidden = kSize * kSize;
  e.n_obs = 4;
  e.n_actions = 4;
  e.transition.resize(e.n_hidden * e.n_actions);
  e.emission.resize(e.n_hidden);
  for (int y = 0; y < kSize; ++y) {
    for (int x = 0; x < kSize; ++x) {
      const int c = cell_index(x, y);
      e.emission[c] = grid_emission(x, y);
      const int dx[4] = {1, -1, 0, 0};
      const int dy[4] = {0, 0, 1, -1};
      for (int a = 0; a < 4; ++a) {
        const int nx = std::clamp(x + dx[a], 0, kSize - 1);
        const int ny = std::clamp(y + dy[a], 0, kSize - 1);
        e.transition[c * 4 + a] = cell_index(nx, ny);
      }
    }
  }
  e.start = cell_index(0, 0);
  return e;
}

inline EnvSpec make_env(const std::string& name) {
  if (name == "timed_response") return make_timed_response();
  if (name == "grid") return make_grid();
  throw std::invalid_argument("unknown environment: " + name);
}

// Runtime wrapper tracking the hidden state and the number of
// environment interactions (used to verify interaction-free replanning).
class Environment {
 public:
  explicit Environment(EnvSpec spec) : spec_(std::move(spec)) {}

  // Returns (hidden state, observation). random_start draws the initial
  // hidden state uniformly (grid evaluation only).
  std::pair<HiddenId, int> reset(Rng& rng, bool random_start = false) {
    state_ = random_start ? sample_int(spec_.n_hidden, rng) : spec_.start;
    return {state_, spec_.emit(state_)};
  }

  std::pair<HiddenId, int> step(int action) {
    state_ = spec_.next(state_, action);
    ++interactions_;
    return {state_, spec_.emit(state_)};
  }

  const EnvSpec& spec() const { return spec_; }
  HiddenId state() const { return state_; }
  long interactions() const { return interactions_; }

 private:
  EnvSpec spec_;
  HiddenId state_ = 0;
  long interactions_ = 0;
};

// BFS shortest number of actions from start_cell to any state emitting
// target_obs. Oracle for the navigation evaluations.
inline int optimal_steps(const EnvSpec& spec, HiddenId start, int target_obs) {
  std::vector<int> dist(spec.n_hidden, -1);
  std::deque<HiddenId> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    const HiddenId s = queue.front();
    queue.pop_front();
    if (spec.emit(s) == target_obs) return dist[s];
    for (int a = 0; a < spec.n_actions; ++a) {
      const HiddenId n = spec.next(s, a);
      if (dist[n] < 0) {
        dist[n] = dist[s] + 1;
        queue.push_back(n);
      }
    }
  }
  throw std::runtime_error("target observation unreachable");
}

}  // namespace feps
