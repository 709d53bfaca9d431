// Command-line front end: topology generation, training, evaluation,
// comparison tables, learning curves and the stdio environment server.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "hetnet/errors.hpp"
#include "hetnet/runner.hpp"
#include "hetnet/topology.hpp"
#include "hetnet/wire.hpp"

namespace {

using namespace hetnet;

// Flags shared by the experiment subcommands. Unset flags leave the profile
// and config-file values alone.
struct CommonFlags {
  std::string profile = "desk";
  std::string config_path;
  std::string scenario;
  std::string method;
  std::vector<std::uint64_t> seeds;
  std::size_t episodes = 0;
  int horizon = 0;
  std::size_t users = 0;
  std::size_t eval_episodes = 0;
  std::optional<std::uint64_t> topology_seed;
  std::string output_dir;

  void add_to(CLI::App& app, bool with_method) {
    app.add_option("--profile", profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--config", config_path, "JSON config file applied over the profile");
    app.add_option("--scenario", scenario, "dense-urban | sparse-suburban | hotspot | mixed");
    if (with_method) app.add_option("--method", method, "td3 | ppo | g-ofdma | ip-pc | pf-eq");
    app.add_option("--seeds", seeds, "Comma-separated training seeds")->delimiter(',');
    app.add_option("--episodes", episodes, "Training episodes per seed");
    app.add_option("--horizon", horizon, "Steps per episode");
    app.add_option("--users", users, "Users per episode");
    app.add_option("--eval-episodes", eval_episodes, "Evaluation episodes per seed");
    app.add_option("--topology-seed", topology_seed, "Seed for randomly placed stations");
    app.add_option("--output-dir", output_dir, "Output root (default $HETNET_OUTPUT_DIR or runs)");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg = profile == "paper" ? paper_profile() : desk_profile();
    if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
    if (!scenario.empty()) {
      auto s = parse_scenario(scenario);
      if (!s) throw ConfigError("scenario", "unknown scenario '" + scenario + "'");
      cfg.scenario = *s;
    }
    if (!method.empty()) {
      auto m = parse_method(method);
      if (!m) throw ConfigError("method", "unknown method '" + method + "'");
      cfg.method = *m;
    }
    if (!seeds.empty()) cfg.seeds = seeds;
    if (episodes != 0) cfg.episodes = episodes;
    if (horizon != 0) cfg.horizon = horizon;
    if (users != 0) cfg.n_users = users;
    if (eval_episodes != 0) cfg.eval_episodes = eval_episodes;
    if (topology_seed) cfg.topology_seed = *topology_seed;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    cfg.validate();
    return cfg;
  }
};

void log_config(const ExperimentConfig& cfg, const std::string& command) {
  std::cerr << "[hetnet " << command << "] resolved config: " << to_json(cfg).dump() << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::vector<ScenarioKind> scenarios_from(const std::string& text, const ExperimentConfig& cfg) {
  if (text.empty()) return {cfg.scenario};
  if (text == "all") return {std::begin(kAllScenarios), std::end(kAllScenarios)};
  std::vector<ScenarioKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto s = parse_scenario(item);
    if (!s) throw ConfigError("scenario", "unknown scenario '" + item + "'");
    out.push_back(*s);
  }
  return out;
}

std::vector<Method> methods_from(const std::string& text) {
  if (text.empty() || text == "all") return {std::begin(kAllMethods), std::end(kAllMethods)};
  if (text == "heuristics") return {std::begin(kHeuristicMethods), std::end(kHeuristicMethods)};
  std::vector<Method> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto m = parse_method(item);
    if (!m) throw ConfigError("methods", "unknown method '" + item + "'");
    out.push_back(*m);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Training allocates batch-sized temporaries every update; keep them on the
  // heap instead of a fresh mmap each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"HetNet downlink resource allocation: simulator, DRL agents and baselines"};
  app.require_subcommand(1);

  // gen-topology
  auto* gen = app.add_subcommand("gen-topology", "Write a scenario layout as CSV");
  std::string gen_scenario = "dense-urban";
  std::size_t gen_users = 20;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--scenario", gen_scenario, "Scenario name")->required();
  gen->add_option("--users", gen_users, "Users to place");
  gen->add_option("--seed", gen_seed, "Placement seed");
  gen->add_option("--out", gen_out, "Output CSV (default stdout)");

  // train
  auto* train = app.add_subcommand("train", "Train TD3 or PPO, one checkpoint and record per seed");
  CommonFlags train_flags;
  train_flags.add_to(*train, true);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a method with greedy episodes, per-episode CSV");
  CommonFlags eval_flags;
  std::string eval_out;
  eval_flags.add_to(*eval, true);
  eval->add_option("--out", eval_out, "Metrics CSV (default <output-dir>/<scenario>/<method>/eval.csv)");

  // compare
  auto* compare = app.add_subcommand("compare", "Comparison table across methods");
  CommonFlags compare_flags;
  std::string compare_scenarios;
  std::string compare_methods = "all";
  std::string compare_out;
  std::string compare_md;
  compare_flags.add_to(*compare, false);
  compare->add_option("--scenarios", compare_scenarios, "Comma-separated scenarios or 'all'");
  compare->add_option("--methods", compare_methods, "Comma-separated methods, 'heuristics' or 'all'");
  compare->add_option("--out", compare_out, "Table CSV (default <output-dir>/compare.csv)");
  compare->add_option("--markdown", compare_md, "Also write a markdown table here");

  // curve
  auto* curve = app.add_subcommand("curve", "Learning curve CSV from training records");
  CommonFlags curve_flags;
  std::string curve_out;
  curve_flags.add_to(*curve, true);
  curve->add_option("--out", curve_out, "Curve CSV (default <output-dir>/<scenario>/<method>/curve.csv)");

  // serve-env
  auto* serve_cmd = app.add_subcommand("serve-env", "Serve one environment over a stdio JSON-lines protocol");
  CommonFlags serve_flags;
  std::string serve_topology;
  serve_flags.add_to(*serve_cmd, false);
  serve_cmd->add_option("--topology", serve_topology, "Topology CSV; its users are kept fixed when present");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto kind = parse_scenario(gen_scenario);
      if (!kind) throw ConfigError("scenario", "unknown scenario '" + gen_scenario + "'");
      auto topo = generate_scenario(*kind, gen_users, gen_seed);
      if (gen_out.empty()) {
        write_topology(std::cout, topo);
      } else {
        auto out = open_output(gen_out);
        write_topology(out, topo);
      }
      return 0;
    }

    if (train->parsed()) {
      auto cfg = train_flags.resolve();
      log_config(cfg, "train");
      auto records = run_training(cfg);
      for (std::size_t i = 0; i < records.size(); ++i) {
        std::cerr << "seed " << cfg.seeds[i] << ": " << records[i].episodes.size() << " episodes, checkpoint "
                  << checkpoint_path(cfg, cfg.scenario, cfg.method, cfg.seeds[i]).string() << '\n';
      }
      return 0;
    }

    if (eval->parsed()) {
      auto cfg = eval_flags.resolve();
      log_config(cfg, "eval");
      std::string path = eval_out.empty() ? (cfg.output_dir / std::string(to_string(cfg.scenario)) /
                                             std::string(to_string(cfg.method)) / "eval.csv")
                                                .string()
                                          : eval_out;
      auto out = open_output(path);
      EnvConfig env = cfg.env_config();
      std::vector<std::vector<EpisodeMetrics>> by_seed;
      for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        auto policy = make_policy(cfg, cfg.scenario, cfg.method, cfg.seeds[i]);
        by_seed.push_back(evaluate_policy(*policy, env, cfg.eval_episodes, cfg.seeds[i]));
        write_eval_csv(out, cfg.seeds[i], by_seed.back(), i == 0);
      }
      auto s = aggregate_seeds(by_seed);
      std::cerr << "bandwidth " << s.mean_band_fraction.mean << " power " << s.mean_power_norm.mean << " score "
                << s.mean_sched_score.mean << " reward " << s.mean_reward.mean << " -> " << path << '\n';
      return 0;
    }

    if (compare->parsed()) {
      auto cfg = compare_flags.resolve();
      log_config(cfg, "compare");
      auto scenarios = scenarios_from(compare_scenarios.empty() ? compare_flags.scenario : compare_scenarios, cfg);
      auto methods = methods_from(compare_methods);
      auto rows = compare_table(scenarios, methods, cfg);
      std::string path = compare_out.empty() ? (cfg.output_dir / "compare.csv").string() : compare_out;
      {
        auto out = open_output(path);
        write_comparison_csv(out, rows);
      }
      if (!compare_md.empty()) {
        auto md = open_output(compare_md);
        write_comparison_markdown(md, rows);
      }
      write_comparison_markdown(std::cout, rows);
      return 0;
    }

    if (curve->parsed()) {
      auto cfg = curve_flags.resolve();
      log_config(cfg, "curve");
      std::vector<TrainingRecord> records;
      for (auto seed : cfg.seeds) {
        auto p = record_path(cfg, cfg.scenario, cfg.method, seed);
        if (!std::filesystem::exists(p)) throw MissingCheckpoint(cfg.scenario, cfg.method, seed, p);
        records.push_back(load_record(p, seed));
      }
      std::string path = curve_out.empty() ? (cfg.output_dir / std::string(to_string(cfg.scenario)) /
                                              std::string(to_string(cfg.method)) / "curve.csv")
                                                 .string()
                                           : curve_out;
      emit_learning_curve(records, path);
      return 0;
    }

    if (serve_cmd->parsed()) {
      auto cfg = serve_flags.resolve();
      EnvConfig env = cfg.env_config();
      if (!serve_topology.empty()) {
        env.topology = load_topology(serve_topology);
        env.user_layout = env.topology.users.empty() ? UserLayout::Uniform : UserLayout::Fixed;
        env.n_users = env.topology.users.empty() ? cfg.n_users : 0;
      }
      env.validate();
      return serve(env, std::cin, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
