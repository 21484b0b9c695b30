#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "feps/policy.hpp"
#include "feps/world_model.hpp"

namespace feps {

// -log p with p = 0 is replaced by this cap so the VFE stays finite when
// the sampled clone mismatches the observation.
inline constexpr double kSurpriseCapProb = 1e-6;
inline const double kSurpriseCap = -std::log(kSurpriseCapProb);

// Preference entries below this are floored (then renormalized) before
// entering the EFE, so unreachable outcomes do not blow up the sum.
inline constexpr double kPrefFloor = 1e-12;

struct EfeTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> values;  // [b][a]

  EfeTable() = default;
  EfeTable(int nb, int na)
      : n_states(nb), n_actions(na),
        values(static_cast<std::size_t>(nb) * na, 0.0) {}

  double& at(int b, int a) { return values[static_cast<std::size_t>(b) * n_actions + a]; }
  double at(int b, int a) const { return values[static_cast<std::size_t>(b) * n_actions + a]; }
  std::span<const double> row(int b) const {
    return {values.data() + static_cast<std::size_t>(b) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }
};

namespace detail {

inline double kl_divergence(std::span<const double> q, std::span<const double> p) {
  double kl = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) kl += q[i] * std::log(q[i] / p[i]);
  }
  return kl;
}

}  // namespace detail

// Variational free energy for the step (b_prev, a_prev) -> s_env:
// KL[posterior || prior] plus the posterior-expected (capped) surprise of
// the actual observation.
inline double vfe(const WorldModel& model, CloneId b_prev, ActionId a_prev,
                  ObsId s_env) {
  const auto q = transition_probs(model, Table::posterior, b_prev, a_prev);
  const auto p = transition_probs(model, Table::prior, b_prev, a_prev);
  double out = detail::kl_divergence(q, p);
  for (int b = 0; b < model.n_beliefs(); ++b) {
    if (model.emitted_obs(b) != s_env) out += q[b] * kSurpriseCap;
  }
  return out;
}

// Expected free energy of action a from belief b. The joint preference
// over (b', s') collapses to a vector over b' because the emission map is
// deterministic: pref[b'] is the preference mass at (b', s(b')).
inline double efe(const WorldModel& model, std::span<const double> pref,
                  CloneId b, ActionId a, bool apply_floor = true) {
  const auto p = transition_probs(model, Table::prior, b, a);
  const int nb = model.n_beliefs();
  std::vector<double> pr(pref.begin(), pref.end());
  if (apply_floor) {
    double z = 0.0;
    for (auto& v : pr) {
      v = std::max(v, kPrefFloor);
      z += v;
    }
    for (auto& v : pr) v /= z;
  }
  double g = 0.0;
  for (int k = 0; k < nb; ++k) {
    if (p[k] == 0.0) continue;
    if (pr[k] <= 0.0) throw std::runtime_error("preference support violation");
    g += p[k] * (std::log(p[k]) - std::log(pr[k]));
  }
  return g;
}

// pi(a|b) = softmax(zeta * G_b[a]), max-subtracted.
inline Policy policy_from_efe(const EfeTable& efe_table, double zeta) {
  Policy pol = Policy::uniform(efe_table.n_states, efe_table.n_actions);
  pol.zeta = zeta;
  for (int b = 0; b < efe_table.n_states; ++b) {
    auto out = pol.row(b);
    double mx = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < efe_table.n_actions; ++a)
      mx = std::max(mx, zeta * efe_table.at(b, a));
    double z = 0.0;
    for (int a = 0; a < efe_table.n_actions; ++a) {
      out[a] = std::exp(zeta * efe_table.at(b, a) - mx);
      z += out[a];
    }
    for (int a = 0; a < efe_table.n_actions; ++a) out[a] /= z;
  }
  return pol;
}

// Wandering preference: the action-marginal of the world model itself.
inline std::vector<double> wandering_pref(const WorldModel& model,
                                          const Policy& policy, CloneId b) {
  return marginal_transition(model, policy, b);
}

// KL between one action's transition row and the policy marginal; equals
// the EFE under the wandering preference.
inline double info_gain(const WorldModel& model, const Policy& policy, CloneId b,
                        ActionId a) {
  const auto p = transition_probs(model, Table::prior, b, a);
  const auto marg = marginal_transition(model, policy, b);
  return detail::kl_divergence(p, marg);
}

inline EfeTable info_gain_table(const WorldModel& model, const Policy& policy) {
  EfeTable g(model.n_beliefs(), model.n_actions);
  for (int b = 0; b < model.n_beliefs(); ++b)
    for (int a = 0; a < model.n_actions; ++a) g.at(b, a) = info_gain(model, policy, b, a);
  return g;
}

// Partition of the actions available from one belief state into classes
// with identical children sets (identical transition supports).
struct AsymptoticClasses {
  std::vector<std::vector<ActionId>> classes;

  int n_actions() const {
    int n = 0;
    for (const auto& c : classes) n += static_cast<int>(c.size());
    return n;
  }
};

inline AsymptoticClasses action_classes(const WorldModel& model, CloneId b,
                                        double support_eps = 1e-12) {
  const int nb = model.n_beliefs();
  std::vector<std::vector<int>> supports(model.n_actions);
  for (int a = 0; a < model.n_actions; ++a) {
    const auto p = transition_probs(model, Table::prior, b, a);
    for (int k = 0; k < nb; ++k)
      if (p[k] > support_eps) supports[a].push_back(k);
  }
  AsymptoticClasses out;
  std::vector<bool> used(model.n_actions, false);
  for (int a = 0; a < model.n_actions; ++a) {
    if (used[a]) continue;
    std::vector<ActionId> cls{a};
    used[a] = true;
    for (int a2 = a + 1; a2 < model.n_actions; ++a2) {
      if (!used[a2] && supports[a2] == supports[a]) {
        cls.push_back(a2);
        used[a2] = true;
      }
    }
    out.classes.push_back(std::move(cls));
  }
  return out;
}

// Appendix-style fixed point of the wandering policy update on a fully
// trained deterministic model: per-action probabilities keyed by the size
// of the action class each action belongs to.
inline std::vector<double> asymptotic_policy(const AsymptoticClasses& classes,
                                             double zeta) {
  if (zeta == -1.0) throw std::runtime_error("undefined at zeta=-1");
  double z = 0.0;
  for (const auto& c : classes.classes)
    z += std::pow(static_cast<double>(c.size()), 1.0 / (1.0 + zeta));
  std::vector<double> pi(classes.n_actions(), 0.0);
  for (const auto& c : classes.classes) {
    const double p = std::pow(static_cast<double>(c.size()), -zeta / (1.0 + zeta)) / z;
    for (ActionId a : c) pi[a] = p;
  }
  return pi;
}

inline double asymptotic_efe(const AsymptoticClasses& classes, double zeta,
                             std::size_t k) {
  if (zeta == -1.0) throw std::runtime_error("undefined at zeta=-1");
  double z = 0.0;
  for (const auto& c : classes.classes)
    z += std::pow(static_cast<double>(c.size()), 1.0 / (1.0 + zeta));
  const double num =
      std::pow(static_cast<double>(classes.classes.at(k).size()), 1.0 / (1.0 + zeta));
  return -std::log(num / z);
}

}  // namespace feps
