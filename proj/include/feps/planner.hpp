#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "feps/free_energy.hpp"
#include "feps/world_model.hpp"

namespace feps {

// Absolute preference over observations: p* on the target, the remainder
// spread uniformly over the others.
struct AbsolutePreference {
  ObsId target_obs = 0;
  double p_star = 0.99;
  int n_obs = 1;

  double operator()(ObsId s) const {
    if (s == target_obs) return p_star;
    return (1.0 - p_star) / (n_obs - 1);
  }
};

struct PlannerConfig {
  ObsId target_obs = 0;
  double p_star = 0.99;
  double beta = 0.9;
  int horizon = 2;     // T_h
  int k_pref = 1;      // policy refinement iterations
  double zeta = -1.0;
  bool sharpen = false;  // keep only maximal-preference transitions
};

// Look-ahead preference over belief transitions, rows supported on the
// children set of each state.
struct LookaheadPreference {
  int n_states = 0;
  std::vector<double> pref;  // [b][b']
  std::vector<std::vector<CloneId>> children_sets;

  std::span<const double> row(int b) const {
    return {pref.data() + static_cast<std::size_t>(b) * n_states,
            static_cast<std::size_t>(n_states)};
  }
};

// r(b'|b) for every b; same contract as marginal_transition.
inline std::vector<double> reachability(const WorldModel& model, const Policy& policy) {
  const int nb = model.n_beliefs();
  std::vector<double> reach(static_cast<std::size_t>(nb) * nb);
  for (int b = 0; b < nb; ++b) {
    const auto r = marginal_transition(model, policy, b);
    std::copy(r.begin(), r.end(), reach.begin() + static_cast<std::size_t>(b) * nb);
  }
  return reach;
}

// v_0(b) = pref(s(b)); the clone structure makes the sum over s a single term.
inline std::vector<double> initial_values(const AbsolutePreference& abs_pref,
                                          const WorldModel& model) {
  std::vector<double> v(model.n_beliefs());
  for (int b = 0; b < model.n_beliefs(); ++b) v[b] = abs_pref(model.emitted_obs(b));
  return v;
}

// v_n(b) = max{ v_{n-1}(b), max_{b+} beta^{n-1} r(b+|b) v_{n-1}(b+) }
inline std::vector<double> propagate_values(std::vector<double> v,
                                            const std::vector<double>& reach,
                                            double beta, int horizon) {
  const int nb = static_cast<int>(v.size());
  std::vector<double> next(nb);
  double discount = 1.0;  // beta^{n-1}
  for (int n = 1; n <= horizon; ++n) {
    for (int b = 0; b < nb; ++b) {
      double best = v[b];
      const double* r = reach.data() + static_cast<std::size_t>(b) * nb;
      for (int k = 0; k < nb; ++k) best = std::max(best, discount * r[k] * v[k]);
      next[b] = best;
    }
    v.swap(next);
    discount *= beta;
  }
  return v;
}

// Children of b: states whose reachability beats the row mean (strict).
// A degenerate all-equal row has no such state; fall back to the support.
inline std::vector<CloneId> children(const std::vector<double>& reach, int n_states,
                                     CloneId b) {
  const double* r = reach.data() + static_cast<std::size_t>(b) * n_states;
  const double mean = std::accumulate(r, r + n_states, 0.0) / n_states;
  std::vector<CloneId> ch;
  for (int k = 0; k < n_states; ++k)
    if (r[k] > mean) ch.push_back(k);
  if (ch.empty()) {
    for (int k = 0; k < n_states; ++k)
      if (r[k] > 0.0) ch.push_back(k);
  }
  return ch;
}

inline LookaheadPreference lookahead_pref(const std::vector<double>& values,
                                          std::vector<std::vector<CloneId>> children_sets) {
  const int nb = static_cast<int>(values.size());
  LookaheadPreference out;
  out.n_states = nb;
  out.pref.assign(static_cast<std::size_t>(nb) * nb, 0.0);
  out.children_sets = std::move(children_sets);
  for (int b = 0; b < nb; ++b) {
    double z = 0.0;
    for (CloneId k : out.children_sets[b]) z += values[k];
    double* row = out.pref.data() + static_cast<std::size_t>(b) * nb;
    if (z > 0.0) {
      for (CloneId k : out.children_sets[b]) row[k] = values[k] / z;
    } else {
      for (CloneId k : out.children_sets[b])
        row[k] = 1.0 / out.children_sets[b].size();
    }
  }
  return out;
}

struct PlanResult {
  Policy policy;
  EfeTable efe_table;
  LookaheadPreference pref;
};

// One-shot task policy: iterate (reachability -> value propagation ->
// look-ahead preference -> EFE -> softmax) k_pref times from a uniform
// policy. No environment interaction is involved.
inline PlanResult infer_policy_detail(const WorldModel& model, const PlannerConfig& cfg) {
  if (cfg.k_pref < 1) throw std::invalid_argument("k_pref must be >= 1");
  const int nb = model.n_beliefs();
  const AbsolutePreference abs_pref{cfg.target_obs, cfg.p_star, model.n_obs};
  const auto v0 = initial_values(abs_pref, model);

  PlanResult res;
  res.policy = Policy::uniform(nb, model.n_actions);
  for (int k = 0; k < cfg.k_pref; ++k) {
    const auto reach = reachability(model, res.policy);
    const auto v = propagate_values(v0, reach, cfg.beta, cfg.horizon);
    std::vector<std::vector<CloneId>> ch(nb);
    for (int b = 0; b < nb; ++b) ch[b] = children(reach, nb, b);
    res.pref = lookahead_pref(v, std::move(ch));
    if (cfg.sharpen) {
      // Keep only the maximal-preference transition per row.
      for (int b = 0; b < nb; ++b) {
        double* row = res.pref.pref.data() + static_cast<std::size_t>(b) * nb;
        const int arg = static_cast<int>(std::max_element(row, row + nb) - row);
        std::fill(row, row + nb, 0.0);
        row[arg] = 1.0;
      }
    }
    // Joint preference pref(s') * pref(b'|b), evaluated at s' = s(b').
    res.efe_table = EfeTable(nb, model.n_actions);
    std::vector<double> joint(nb);
    for (int b = 0; b < nb; ++b) {
      const auto prow = res.pref.row(b);
      for (int k2 = 0; k2 < nb; ++k2)
        joint[k2] = abs_pref(model.emitted_obs(k2)) * prow[k2];
      for (int a = 0; a < model.n_actions; ++a)
        res.efe_table.at(b, a) = efe(model, joint, b, a);
    }
    res.policy = policy_from_efe(res.efe_table, cfg.zeta);
  }
  return res;
}

inline Policy infer_policy(const WorldModel& model, const PlannerConfig& cfg) {
  return infer_policy_detail(model, cfg).policy;
}

}  // namespace feps
