// feps: train FEPS agents, evaluate trained models, inspect model files.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "feps/io.hpp"

namespace fs = std::filesystem;
using namespace feps;

namespace {

constexpr const char* kVersion = "feps 0.1.0";
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::vector<std::pair<int, WorldModel>> load_models(const fs::path& dir) {
  std::vector<std::pair<int, WorldModel>> models;
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("agent_", 0) != 0 || entry.path().extension() != ".json") continue;
    const int id = std::stoi(name.substr(6));
    models.emplace_back(id, model_from_json(load_json(entry.path())));
  }
  if (models.empty()) throw ConfigError("no agent_*.json models in " + dir.string());
  std::sort(models.begin(), models.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return models;
}

std::string start_label(const EnvSpec& spec, HiddenId s) {
  if (spec.name == "grid")
    return "(" + std::to_string(grid::cell_x(s)) + "," + std::to_string(grid::cell_y(s)) + ")";
  return "E" + std::to_string(s);
}

int cmd_train(const fs::path& cfg_path, const fs::path& out_dir,
              std::optional<std::uint64_t> seed_override) {
  TrainConfig cfg;
  try {
    cfg = train_config_from_json(load_json(cfg_path));
    if (seed_override) cfg.seed = *seed_override;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train(cfg);

  try {
    fs::create_directories(out_dir / "models");
    std::vector<std::string> outputs;
    for (int i = 0; i < cfg.n_agents; ++i) {
      const fs::path p = out_dir / "models" / ("agent_" + std::to_string(i) + ".json");
      write_atomic(p, model_to_json(result.models[i]).dump());
      outputs.push_back(p.string());
    }
    const fs::path metrics_path = out_dir / "metrics.csv";
    write_atomic(metrics_path, metrics_csv(result.metrics));
    outputs.push_back(metrics_path.string());

    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0).count();
    json manifest{{"config", train_config_to_json(cfg)},
                  {"seed", cfg.seed},
                  {"version", kVersion},
                  {"outputs", outputs},
                  {"duration_seconds", secs}};
    write_atomic(out_dir / "manifest.json", manifest.dump(2));
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}

int cmd_eval(const fs::path& model_dir, const std::string& mode,
             const fs::path& cfg_path, const fs::path& out_dir) {
  std::vector<std::pair<int, WorldModel>> models;
  json cfg;
  EnvSpec spec;
  try {
    cfg = load_json(cfg_path);
    spec = make_env(detail::require<std::string>(cfg, "env"));
    models = load_models(model_dir);
    for (const auto& [id, m] : models) {
      if (m.n_obs != spec.n_obs ||
          m.n_actions != spec.n_actions)
        throw ConfigError("model agent_" + std::to_string(id) +
                          " does not match environment dimensions");
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }

  const int n_rounds = detail::get_or(cfg, "n_rounds", 1000);
  const int max_len = detail::get_or(cfg, "max_len", 80);
  const bool random_start = detail::get_or(cfg, "random_start", spec.name == "grid");
  const std::uint64_t seed = detail::get_or<std::uint64_t>(cfg, "seed", 0);

  std::vector<EvalRow> rows;
  if (mode == "predict") {
    const std::string est_name = detail::get_or<std::string>(cfg, "estimator", "superposition");
    const Estimator est =
        est_name == "bare" ? Estimator::bare : Estimator::superposition;
    for (const auto& [id, model] : models) {
      Environment env(spec);
      Rng rng(mix_seed(seed, id));
      const auto lengths =
          evaluate_prediction(model, env, est, n_rounds, max_len, rng, random_start);
      rows.push_back({id, "all", "median_len", median(lengths)});
      rows.push_back({id, "all", "q25_len", quantile(lengths, 0.25)});
      rows.push_back({id, "all", "q75_len", quantile(lengths, 0.75)});
    }
  } else {  // goal
    PlannerConfig pc;
    try {
      pc = planner_from_json(detail::require<json>(cfg, "planner"));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
    for (const auto& [id, model] : models) {
      Environment env(spec);
      Rng rng(mix_seed(seed, id));
      const auto by_start =
          evaluate_goal(model, env, pc, n_rounds, max_len, rng, random_start);
      for (const auto& [start, steps] : by_start)
        rows.push_back({id, start_label(spec, start), "median_steps", median(steps)});
    }
    // Uniform-policy baseline, reported as agent -1.
    {
      WorldModel ref = models.front().second;
      PlannerConfig uniform_pc = pc;
      uniform_pc.zeta = 0.0;  // softmax with zeta=0 is uniform
      Environment env(spec);
      Rng rng(mix_seed(seed, 0xba5e11e5ull));
      const auto by_start =
          evaluate_goal(ref, env, uniform_pc, n_rounds, max_len, rng, random_start);
      for (const auto& [start, steps] : by_start)
        rows.push_back({-1, start_label(spec, start), "baseline_median_steps", median(steps)});
    }
  }

  try {
    fs::create_directories(out_dir);
    write_atomic(out_dir / ("eval_" + mode + ".csv"), eval_csv(rows));
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}

int cmd_inspect(const fs::path& model_path, bool as_json,
                const std::optional<fs::path>& planner_path) {
  WorldModel model;
  std::optional<PlannerConfig> pc;
  try {
    model = model_from_json(load_json(model_path));
    if (planner_path) pc = planner_from_json(load_json(*planner_path));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }

  std::optional<LookaheadPreference> pref;
  if (pc) pref = infer_policy_detail(model, *pc).pref;

  json report;
  report["clone_obs"] = model.clone_obs;
  json transitions = json::array();
  for (int b = 0; b < model.n_beliefs(); ++b) {
    for (int a = 0; a < model.n_actions; ++a) {
      const auto p = transition_probs(model, Table::prior, b, a);
      const int top = static_cast<int>(
          std::max_element(p.begin(), p.end()) - p.begin());
      json t{{"from", b}, {"obs", model.emitted_obs(b)}, {"action", a},
             {"to", top}, {"prob", p[top]}};
      if (pref) {
        const auto row = pref->row(b);
        const int star = static_cast<int>(
            std::max_element(row.begin(), row.end()) - row.begin());
        t["preferred"] = (star == top && row[star] > 0.0);
      }
      transitions.push_back(t);
    }
  }
  report["top_transitions"] = transitions;

  if (as_json) {
    std::cout << report.dump(2) << "\n";
    return 0;
  }
  std::cout << "clone -> observation:\n";
  for (int b = 0; b < model.n_beliefs(); ++b)
    std::cout << "  b" << b << " -> s" << model.emitted_obs(b) << "\n";
  std::cout << "top transitions (prior):\n";
  for (const auto& t : transitions) {
    std::cout << "  b" << t["from"].get<int>() << " --a" << t["action"].get<int>()
              << "--> b" << t["to"].get<int>() << "  p=" << t["prob"].get<double>();
    if (t.contains("preferred") && t["preferred"].get<bool>()) std::cout << "  *";
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free energy projective simulation trainer and evaluator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train agents and export models + metrics");
  std::string train_cfg, train_out;
  std::optional<std::uint64_t> seed_override;
  train_cmd->add_option("-c,--config", train_cfg, "Training config (JSON)")->required();
  train_cmd->add_option("-o,--out", train_out, "Output directory")->required();
  std::uint64_t seed_val = 0;
  auto* seed_opt = train_cmd->add_option("--seed", seed_val, "Override the config seed");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate trained models");
  std::string eval_models, eval_mode, eval_cfg, eval_out;
  eval_cmd->add_option("-m,--models", eval_models, "Directory of agent_*.json files")->required();
  eval_cmd->add_option("--mode", eval_mode, "predict|goal")
      ->required()
      ->check(CLI::IsMember({"predict", "goal"}));
  eval_cmd->add_option("-c,--config", eval_cfg, "Evaluation config (JSON)")->required();
  eval_cmd->add_option("-o,--out", eval_out, "Output directory")->required();

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "Report a model file");
  std::string inspect_model, inspect_planner;
  bool inspect_json = false;
  inspect_cmd->add_option("model", inspect_model, "Model JSON file")->required();
  inspect_cmd->add_flag("--json", inspect_json, "Machine-readable output");
  auto* planner_opt =
      inspect_cmd->add_option("--planner", inspect_planner, "Planner config (JSON)");

  CLI11_PARSE(app, argc, argv);

  if (*train_cmd) {
    if (*seed_opt) seed_override = seed_val;
    return cmd_train(train_cfg, train_out, seed_override);
  }
  if (*eval_cmd) return cmd_eval(eval_models, eval_mode, eval_cfg, eval_out);
  if (*inspect_cmd) {
    std::optional<fs::path> pp;
    if (*planner_opt) pp = inspect_planner;
    return cmd_inspect(inspect_model, inspect_json, pp);
  }
  return 0;
}
