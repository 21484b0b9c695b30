#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "feps/planner.hpp"
#include "feps/trainer.hpp"
#include "feps/world_model.hpp"

namespace feps {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
T require(const json& j, const std::string& field) {
  if (!j.contains(field)) throw ConfigError("missing config field: " + field);
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("invalid value for config field: " + field);
  }
}

template <typename T>
T get_or(const json& j, const std::string& field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("invalid value for config field: " + field);
  }
}

}  // namespace detail

// ---- world model <-> JSON ----
// Arrays are row-major [b][a][b']; nlohmann serializes doubles with
// shortest-round-trip precision, which exceeds 15 significant digits.

inline json model_to_json(const WorldModel& m) {
  return json{{"n_obs", m.n_obs},
              {"n_clones", m.n_clones},
              {"n_actions", m.n_actions},
              {"clone_obs", m.clone_obs},
              {"h_prior", m.h_prior},
              {"h_posterior", m.h_posterior},
              {"h0", m.h0},
              {"gamma", m.gamma},
              {"reward_scale", m.reward_scale}};
}

inline WorldModel model_from_json(const json& j) {
  WorldModel m(detail::require<int>(j, "n_obs"), detail::require<int>(j, "n_clones"),
               detail::require<int>(j, "n_actions"), detail::require<double>(j, "h0"),
               detail::require<double>(j, "gamma"),
               detail::require<double>(j, "reward_scale"));
  m.clone_obs = detail::require<std::vector<int>>(j, "clone_obs");
  m.h_prior = detail::require<std::vector<double>>(j, "h_prior");
  m.h_posterior = detail::require<std::vector<double>>(j, "h_posterior");
  const std::size_t nb = static_cast<std::size_t>(m.n_beliefs());
  if (m.clone_obs.size() != nb || m.h_prior.size() != nb * m.n_actions * nb ||
      m.h_posterior.size() != m.h_prior.size())
    throw ConfigError("model tables have inconsistent dimensions");
  std::vector<int> counts(m.n_obs, 0);
  for (int obs : m.clone_obs) {
    if (obs < 0 || obs >= m.n_obs) throw ConfigError("clone_obs out of range");
    ++counts[obs];
  }
  for (int c : counts)
    if (c != m.n_clones) throw ConfigError("clone_obs is not a balanced clone map");
  m.confidence.assign(m.h_prior.size(), 0);
  return m;
}

// ---- configs ----

inline PlannerConfig planner_from_json(const json& j) {
  PlannerConfig pc;
  pc.target_obs = detail::require<int>(j, "target_obs");
  pc.p_star = detail::get_or(j, "p_star", pc.p_star);
  pc.beta = detail::get_or(j, "beta", pc.beta);
  pc.horizon = detail::get_or(j, "horizon", pc.horizon);
  pc.k_pref = detail::get_or(j, "k_pref", pc.k_pref);
  pc.zeta = detail::get_or(j, "zeta", pc.zeta);
  pc.sharpen = detail::get_or(j, "sharpen", pc.sharpen);
  return pc;
}

inline json planner_to_json(const PlannerConfig& pc) {
  return json{{"target_obs", pc.target_obs}, {"p_star", pc.p_star},
              {"beta", pc.beta},             {"horizon", pc.horizon},
              {"k_pref", pc.k_pref},         {"zeta", pc.zeta},
              {"sharpen", pc.sharpen}};
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.env = detail::require<std::string>(j, "env");
  c.n_agents = detail::require<int>(j, "n_agents");
  c.n_clones = detail::require<int>(j, "n_clones");
  c.n_episodes = detail::require<int>(j, "n_episodes");
  c.episode_len = detail::get_or(j, "episode_len", 80);
  c.gamma = detail::require<double>(j, "gamma");
  c.reward_scale = detail::require<double>(j, "reward_scale");
  c.h0 = detail::get_or(j, "h0", c.h0);
  c.zeta_wander = detail::get_or(j, "zeta_wander", 0.0);
  c.zeta_task = detail::get_or(j, "zeta_task", -1.0);
  c.phase_schedule = detail::get_or<std::string>(j, "phase_schedule", "task");
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("planner")) c.planner = planner_from_json(j.at("planner"));
  c.validate();
  return c;
}

inline json train_config_to_json(const TrainConfig& c) {
  return json{{"env", c.env},
              {"n_agents", c.n_agents},
              {"n_clones", c.n_clones},
              {"n_episodes", c.n_episodes},
              {"episode_len", c.episode_len},
              {"gamma", c.gamma},
              {"reward_scale", c.reward_scale},
              {"h0", c.h0},
              {"zeta_wander", c.zeta_wander},
              {"zeta_task", c.zeta_task},
              {"phase_schedule", c.phase_schedule},
              {"seed", c.seed},
              {"planner", planner_to_json(c.planner)}};
}

// ---- files ----

inline json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("parse error in " + path.string() + ": " + e.what());
  }
  return j;
}

// Write to a temp file in the same directory, then rename, so failures
// never leave partial output behind.
inline void write_atomic(const std::filesystem::path& path, const std::string& data) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << data;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "agent_id,episode,phase,mean_vfe,mean_efe,mean_traj_len\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.agent_id << ',' << r.episode << ',' << phase_name(r.phase) << ','
        << r.mean_vfe << ',' << r.mean_efe << ',' << r.mean_traj_len << '\n';
  }
  return out.str();
}

struct EvalRow {
  int agent_id = 0;
  std::string start;
  std::string metric;
  double value = 0.0;
};

inline std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream out;
  out << "agent_id,start,metric,value\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.agent_id << ',' << r.start << ',' << r.metric << ',' << r.value << '\n';
  return out.str();
}

}  // namespace feps
