#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "feps/belief.hpp"
#include "feps/environment.hpp"
#include "feps/free_energy.hpp"
#include "feps/planner.hpp"
#include "feps/world_model.hpp"

namespace feps {

enum class Phase { wander, task };

inline const char* phase_name(Phase p) { return p == Phase::wander ? "wander" : "task"; }

struct TrainConfig {
  std::string env = "timed_response";
  int n_agents = 1;
  int n_clones = 2;
  int n_episodes = 100;
  int episode_len = 80;
  double gamma = 1e-3;
  double reward_scale = 3.0;
  // Initial edge weight. Matching the reward scale keeps early rewards from
  // locking in premature clone conventions while leaving enough contrast for
  // conventions to form; smaller values stall a large fraction of agents on
  // the grid task.
  double h0 = 3.0;
  double zeta_wander = 0.0;
  double zeta_task = -1.0;
  std::string phase_schedule = "task";  // "task" | "wander_then_task"
  bool random_start = false;            // draw the initial hidden state per episode
  std::uint64_t seed = 0;
  PlannerConfig planner;  // target, p_star, beta, horizon, k_pref; zeta_task applies

  Phase training_phase() const {
    return phase_schedule == "task" ? Phase::task : Phase::wander;
  }

  void validate() const {
    if (n_agents <= 0 || n_clones <= 0 || n_episodes <= 0 || episode_len <= 0)
      throw std::invalid_argument("counts must be positive");
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must be in [0,1]");
    if (reward_scale <= 0.0) throw std::invalid_argument("reward_scale must be positive");
    if (phase_schedule != "task" && phase_schedule != "wander_then_task")
      throw std::invalid_argument("unknown phase_schedule: " + phase_schedule);
  }
};

struct MetricsRow {
  int agent_id = 0;
  int episode = 0;
  Phase phase = Phase::task;
  double mean_vfe = 0.0;
  double mean_efe = 0.0;
  double mean_traj_len = 0.0;
};

// Agent-side state carried across episodes.
struct Agent {
  WorldModel model;
  Policy policy;
  EfeTable efe_table;  // table the current policy was derived from
  Trajectory traj;
  Rng rng;
};

// Recompute the phase policy from the (just synced) model.
inline void recompute_policy(Agent& agent, const TrainConfig& cfg, Phase phase) {
  if (phase == Phase::wander) {
    agent.efe_table = info_gain_table(agent.model, agent.policy);
    agent.policy = policy_from_efe(agent.efe_table, cfg.zeta_wander);
  } else {
    PlannerConfig pc = cfg.planner;
    pc.zeta = cfg.zeta_task;
    auto plan = infer_policy_detail(agent.model, pc);
    agent.policy = std::move(plan.policy);
    agent.efe_table = std::move(plan.efe_table);
  }
}

// One 80-step interaction episode: predict from the prior, learn on the
// posterior, sync and re-derive the policy at the end.
inline MetricsRow run_episode(Agent& agent, Environment& env, const TrainConfig& cfg,
                              Phase phase, int agent_id, int episode) {
  WorldModel& model = agent.model;
  auto [state, obs] = env.reset(agent.rng, cfg.random_start);
  const auto clones = model.clones_of(obs);
  CloneId belief = clones[sample_int(static_cast<int>(clones.size()), agent.rng)];

  double vfe_sum = 0.0, efe_sum = 0.0;
  std::vector<int> traj_lens;
  int current_len = 0;

  for (int step = 0; step < cfg.episode_len; ++step) {
    const ActionId action = sample_index(agent.policy.row(belief), agent.rng);
    const CloneId predicted = sample_transition(model, belief, action, agent.rng);
    const ObsId predicted_obs = model.emitted_obs(predicted);

    auto [next_state, obs_env] = env.step(action);
    (void)next_state;

    vfe_sum += vfe(model, belief, action, obs_env);
    efe_sum += agent.efe_table.at(belief, action);

    if (predicted_obs == obs_env) {
      agent.traj.push(belief, action, predicted);
      record_success(model, agent.traj);
      belief = predicted;
      ++current_len;
    } else {
      distribute_rewards(model, agent.traj);
      sync_prior(model);
      traj_lens.push_back(current_len);
      current_len = 0;
      const auto cl = model.clones_of(obs_env);
      belief = cl[sample_int(static_cast<int>(cl.size()), agent.rng)];
    }
  }
  traj_lens.push_back(current_len);
  // Pending trajectory: convert accumulated confidence into rewards so
  // episodes stay self-contained, then promote the posterior.
  distribute_rewards(model, agent.traj);
  sync_prior(model);
  recompute_policy(agent, cfg, phase);

  MetricsRow row;
  row.agent_id = agent_id;
  row.episode = episode;
  row.phase = phase;
  row.mean_vfe = vfe_sum / cfg.episode_len;
  row.mean_efe = efe_sum / cfg.episode_len;
  // A trajectory is a nonempty run of correct predictions, so failed
  // re-localizations (zero-length segments) do not enter the mean.
  row.mean_traj_len = 0.0;
  int n_traj = 0;
  for (int l : traj_lens) {
    if (l > 0) {
      row.mean_traj_len += l;
      ++n_traj;
    }
  }
  if (n_traj > 0) row.mean_traj_len /= n_traj;
  return row;
}

struct TrainResult {
  std::vector<WorldModel> models;   // one per agent
  std::vector<MetricsRow> metrics;  // ordered by (agent_id, episode)
};

inline int worker_count(int n_agents) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FEPS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = cap;
  }
  return std::clamp(n, 1, n_agents);
}

inline void train_agent(const TrainConfig& cfg, const EnvSpec& spec, int agent_id,
                        WorldModel& model_out, std::vector<MetricsRow>& metrics_out) {
  Agent agent;
  agent.model = WorldModel(spec.n_obs, cfg.n_clones, spec.n_actions, cfg.h0,
                           cfg.gamma, cfg.reward_scale);
  agent.rng.seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(agent_id)));
  agent.policy = Policy::uniform(agent.model.n_beliefs(), agent.model.n_actions);
  const Phase phase = cfg.training_phase();
  recompute_policy(agent, cfg, phase);

  Environment env(spec);
  metrics_out.reserve(cfg.n_episodes);
  for (int ep = 0; ep < cfg.n_episodes; ++ep)
    metrics_out.push_back(run_episode(agent, env, cfg, phase, agent_id, ep));
  model_out = std::move(agent.model);
}

// Agents are independent; each worker owns its model, env and rng stream,
// so the result does not depend on scheduling.
inline TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  const EnvSpec spec = make_env(cfg.env);
  TrainResult res;
  res.models.resize(cfg.n_agents);
  std::vector<std::vector<MetricsRow>> per_agent(cfg.n_agents);

  const int n_workers = worker_count(cfg.n_agents);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < cfg.n_agents; i = next.fetch_add(1))
      train_agent(cfg, spec, i, res.models[i], per_agent[i]);
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& rows : per_agent)
    res.metrics.insert(res.metrics.end(), rows.begin(), rows.end());
  return res;
}

enum class Estimator { bare, superposition };

// Run n_rounds rounds under a uniform policy; each round records how many
// consecutive correct predictions the estimator makes before its first
// failure (or max_len). Bare estimation fails when its single sampled
// clone mispredicts; superposition only when every candidate does.
inline std::vector<int> evaluate_prediction(const WorldModel& model, Environment& env,
                                            Estimator estimator, int n_rounds,
                                            int max_len, Rng& rng,
                                            bool random_start = false) {
  const Policy uniform = Policy::uniform(model.n_beliefs(), model.n_actions);
  std::vector<int> lengths;
  lengths.reserve(n_rounds);
  for (int round = 0; round < n_rounds; ++round) {
    auto [state, obs] = env.reset(rng, random_start);
    (void)state;
    int len = 0;
    if (estimator == Estimator::bare) {
      BareTracker tracker = BareTracker::init(model, obs, rng);
      for (int step = 0; step < max_len; ++step) {
        const ActionId a = sample_index(uniform.row(tracker.belief), rng);
        const CloneId predicted = sample_transition(model, tracker.belief, a, rng);
        const auto [s, obs_env] = env.step(a);
        (void)s;
        if (model.emitted_obs(predicted) != obs_env) break;
        tracker.belief = predicted;
        ++len;
      }
    } else {
      BeliefHypothesis hyp = init_hypothesis(model, obs);
      for (int step = 0; step < max_len; ++step) {
        const ActionId a = select_action(hyp, uniform, rng);
        const BeliefHypothesis predicted = advance(hyp, a, model, rng);
        const auto [s, obs_env] = env.step(a);
        (void)s;
        const FilterResult f = filter(predicted, obs_env, model);
        if (f.reset) break;
        hyp = f.hypothesis;
        ++len;
      }
    }
    lengths.push_back(len);
  }
  return lengths;
}

// Steps to reach a state emitting the planner's target observation,
// tracking beliefs in superposition and acting with the inferred policy.
// Keyed by the start state so per-cell medians can be compared to the
// BFS oracle.
inline std::map<HiddenId, std::vector<int>> evaluate_goal(
    const WorldModel& model, Environment& env, const PlannerConfig& planner_cfg,
    int n_rounds, int max_steps, Rng& rng, bool random_start = false) {
  const Policy policy = infer_policy(model, planner_cfg);
  std::map<HiddenId, std::vector<int>> steps_by_start;
  for (int round = 0; round < n_rounds; ++round) {
    auto [state, obs] = env.reset(rng, random_start);
    const HiddenId start = state;
    BeliefHypothesis hyp = init_hypothesis(model, obs);
    int steps = 0;
    while (obs != planner_cfg.target_obs && steps < max_steps) {
      const ActionId a = select_action(hyp, policy, rng);
      const BeliefHypothesis predicted = advance(hyp, a, model, rng);
      const auto [s, obs_env] = env.step(a);
      (void)s;
      hyp = filter(predicted, obs_env, model).hypothesis;
      obs = obs_env;
      ++steps;
    }
    steps_by_start[start].push_back(steps);
  }
  return steps_by_start;
}

// Summary helpers for the evaluation CSVs.
template <typename T>
double quantile(std::vector<T> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - lo;
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

template <typename T>
double median(const std::vector<T>& v) {
  return quantile(v, 0.5);
}

// Running average over a trailing window, per agent, of one metric.
inline std::vector<double> running_average(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += xs[i];
    if (i >= static_cast<std::size_t>(window)) sum -= xs[i - window];
    out[i] = sum / std::min<std::size_t>(i + 1, window);
  }
  return out;
}

}  // namespace feps
