#pragma once

#include <span>
#include <vector>

namespace feps {

// Probability table over actions conditioned on belief state, together
// with the scaling parameter it was derived with.
struct Policy {
  int n_states = 0;
  int n_actions = 0;
  double zeta = 0.0;
  std::vector<double> probs;  // [b][a], row-major

  static Policy uniform(int n_states, int n_actions) {
    Policy p;
    p.n_states = n_states;
    p.n_actions = n_actions;
    p.probs.assign(static_cast<std::size_t>(n_states) * n_actions,
                   1.0 / n_actions);
    return p;
  }

  std::span<const double> row(int b) const {
    return {probs.data() + static_cast<std::size_t>(b) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }
  std::span<double> row(int b) {
    return {probs.data() + static_cast<std::size_t>(b) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }
};

}  // namespace feps
