#pragma once

#include <algorithm>
#include <vector>

#include "feps/policy.hpp"
#include "feps/rng.hpp"
#include "feps/world_model.hpp"

namespace feps {

// Set of candidate clone clips entertained simultaneously. Clips are
// either excited or not, so duplicates merge.
struct BeliefHypothesis {
  std::vector<CloneId> candidates;  // sorted, unique

  bool empty() const { return candidates.empty(); }
  std::size_t size() const { return candidates.size(); }
};

inline BeliefHypothesis init_hypothesis(const WorldModel& model, ObsId obs) {
  return {model.clones_of(obs)};
}

// Sample one action per candidate, then sample the final action from the
// resulting empirical frequencies.
inline ActionId select_action(const BeliefHypothesis& hyp, const Policy& policy,
                              Rng& rng) {
  std::vector<double> freq(policy.n_actions, 0.0);
  for (CloneId b : hyp.candidates) {
    const ActionId a = sample_index(policy.row(b), rng);
    freq[a] += 1.0 / hyp.candidates.size();
  }
  return sample_index(freq, rng);
}

// One predicted clip per candidate, drawn from the prior table.
inline BeliefHypothesis advance(const BeliefHypothesis& hyp, ActionId action,
                                const WorldModel& model, Rng& rng) {
  BeliefHypothesis next;
  for (CloneId b : hyp.candidates)
    next.candidates.push_back(sample_transition(model, b, action, rng));
  std::sort(next.candidates.begin(), next.candidates.end());
  next.candidates.erase(std::unique(next.candidates.begin(), next.candidates.end()),
                        next.candidates.end());
  return next;
}

struct FilterResult {
  BeliefHypothesis hypothesis;
  bool reset = false;  // true when every candidate mispredicted
};

// Eliminate candidates incompatible with the observation; if none
// survive, start the hypothesis over from all clones of obs_env.
inline FilterResult filter(const BeliefHypothesis& predicted, ObsId obs_env,
                           const WorldModel& model) {
  FilterResult out;
  for (CloneId b : predicted.candidates)
    if (model.emitted_obs(b) == obs_env) out.hypothesis.candidates.push_back(b);
  if (out.hypothesis.empty()) {
    out.hypothesis = init_hypothesis(model, obs_env);
    out.reset = true;
  }
  return out;
}

// Bare estimator: a single clone clip at a time. On a failed prediction
// the belief re-seats uniformly among the clones of the observed state.
struct BareTracker {
  CloneId belief = 0;

  static BareTracker init(const WorldModel& model, ObsId obs, Rng& rng) {
    const auto clones = model.clones_of(obs);
    return {clones[sample_int(static_cast<int>(clones.size()), rng)]};
  }
};

}  // namespace feps
