#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "feps/policy.hpp"
#include "feps/rng.hpp"

namespace feps {

using CloneId = int;
using ObsId = int;
using ActionId = int;

enum class Table { prior, posterior };

struct TransitionEdge {
  CloneId from;
  ActionId action;
  CloneId to;
};

// Maximal run of consecutive correct predictions; cleared at the first
// mismatch, when the accumulated confidence is converted into rewards.
struct Trajectory {
  std::vector<TransitionEdge> edges;

  void push(CloneId b, ActionId a, CloneId b_next) { edges.push_back({b, a, b_next}); }
  std::size_t length() const { return edges.size(); }
  bool empty() const { return edges.empty(); }
  void clear() { edges.clear(); }
};

// Clone-structured ECM. Each clone clip emits exactly one observation
// (fixed at construction); the per-action transition edges carry h-values
// in a prior and a posterior table plus a confidence counter.
class WorldModel {
 public:
  int n_obs = 0;
  int n_clones = 0;
  int n_actions = 0;
  double h0 = 1.0;
  double gamma = 1e-3;
  double reward_scale = 3.0;

  std::vector<ObsId> clone_obs;      // [b] -> observation
  std::vector<double> h_prior;       // [b][a][b']
  std::vector<double> h_posterior;   // same shape
  std::vector<std::int32_t> confidence;  // same shape, the f attribute

  WorldModel() = default;
  WorldModel(int n_obs_, int n_clones_, int n_actions_, double h0_ = 1.0,
             double gamma_ = 1e-3, double reward_scale_ = 3.0)
      : n_obs(n_obs_),
        n_clones(n_clones_),
        n_actions(n_actions_),
        h0(h0_),
        gamma(gamma_),
        reward_scale(reward_scale_) {
    if (n_obs <= 0 || n_clones <= 0 || n_actions <= 0 || h0 <= 0.0)
      throw std::invalid_argument("WorldModel: sizes and h0 must be positive");
    const int nb = n_beliefs();
    clone_obs.resize(nb);
    for (int b = 0; b < nb; ++b) clone_obs[b] = b / n_clones;  // block layout
    const std::size_t n = static_cast<std::size_t>(nb) * n_actions * nb;
    h_prior.assign(n, h0);
    h_posterior.assign(n, h0);
    confidence.assign(n, 0);
  }

  int n_beliefs() const { return n_obs * n_clones; }

  std::size_t index(CloneId b, ActionId a, CloneId b_next) const {
    return (static_cast<std::size_t>(b) * n_actions + a) * n_beliefs() + b_next;
  }

  ObsId emitted_obs(CloneId b) const { return clone_obs[b]; }

  // All clones mapping to obs. Cheap enough given the block layout, but
  // computed from clone_obs so imported models with permuted maps work too.
  std::vector<CloneId> clones_of(ObsId obs) const {
    std::vector<CloneId> out;
    for (int b = 0; b < n_beliefs(); ++b)
      if (clone_obs[b] == obs) out.push_back(b);
    return out;
  }

  std::span<const double> row(Table t, CloneId b, ActionId a) const {
    const auto& h = (t == Table::prior) ? h_prior : h_posterior;
    return {h.data() + index(b, a, 0), static_cast<std::size_t>(n_beliefs())};
  }
  std::span<double> row(Table t, CloneId b, ActionId a) {
    auto& h = (t == Table::prior) ? h_prior : h_posterior;
    return {h.data() + index(b, a, 0), static_cast<std::size_t>(n_beliefs())};
  }
};

// Eq.-(5)-style normalization of an h row.
inline std::vector<double> transition_probs(const WorldModel& model, Table table,
                                            CloneId b, ActionId a) {
  const auto r = model.row(table, b, a);
  const double sum = std::accumulate(r.begin(), r.end(), 0.0);
  if (sum <= 0.0) throw std::runtime_error("degenerate transition row");
  std::vector<double> p(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) p[i] = r[i] / sum;
  return p;
}

// Deliberation samples from the prior table; the posterior only collects
// updates until they are synced back.
inline CloneId sample_transition(const WorldModel& model, CloneId b, ActionId a,
                                 Rng& rng) {
  const auto p = transition_probs(model, Table::prior, b, a);
  return sample_index(p, rng);
}

// A verified prediction raises the confidence of every edge in the
// trajectory by one (per occurrence).
inline void record_success(WorldModel& model, const Trajectory& traj) {
  for (const auto& e : traj.edges) ++model.confidence[model.index(e.from, e.action, e.to)];
}

// Trajectory end: every edge decays toward h0, trajectory edges receive
// f*R on top, confidences reset. The failing edge never entered the
// trajectory, so its confidence is 0 and it only decays.
inline void distribute_rewards(WorldModel& model, Trajectory& traj, bool decay = true) {
  const double g = model.gamma;
  const double h0 = model.h0;
  const double R = model.reward_scale;
  for (std::size_t i = 0; i < model.h_posterior.size(); ++i) {
    double h = model.h_posterior[i];
    if (decay) h -= g * (h - h0);
    if (model.confidence[i] != 0) {
      h += model.confidence[i] * R;
      model.confidence[i] = 0;
    }
    model.h_posterior[i] = h;
  }
  traj.clear();
}

inline void sync_prior(WorldModel& model) { model.h_prior = model.h_posterior; }

// Relax every posterior h-value toward h0 by one forgetting step.
inline void decay_edges(WorldModel& model) {
  const double g = model.gamma;
  const double h0 = model.h0;
  for (double& h : model.h_posterior) h -= g * (h - h0);
}

// Policy-averaged transition distribution r(b'|b), a.k.a. reachability.
inline std::vector<double> marginal_transition(const WorldModel& model,
                                               const Policy& policy, CloneId b,
                                               Table table = Table::prior) {
  const int nb = model.n_beliefs();
  std::vector<double> out(nb, 0.0);
  const auto pi = policy.row(b);
  for (int a = 0; a < model.n_actions; ++a) {
    if (pi[a] == 0.0) continue;
    const auto p = transition_probs(model, table, b, a);
    for (int k = 0; k < nb; ++k) out[k] += pi[a] * p[k];
  }
  return out;
}

}  // namespace feps
