#include "hetnet/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "hetnet/errors.hpp"

namespace hetnet {

using nlohmann::json;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::TD3: return "td3";
    case Method::PPO: return "ppo";
    case Method::GOfdma: return "g-ofdma";
    case Method::IpPc: return "ip-pc";
    case Method::PfEq: return "pf-eq";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view text) {
  for (Method m : kAllMethods) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

MissingCheckpoint::MissingCheckpoint(ScenarioKind scenario, Method method, std::uint64_t seed,
                                     const std::filesystem::path& path)
    : std::runtime_error("missing checkpoint for scenario " + std::string(to_string(scenario)) +
                         ", method " + std::string(to_string(method)) + ", seed " + std::to_string(seed) +
                         " (expected " + path.string() + ")") {}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
  std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) throw ConfigError("seeds", "must be distinct");
  if (episodes == 0) throw ConfigError("episodes", "must be >= 1");
  if (horizon <= 0) throw ConfigError("horizon", "must be >= 1");
  if (n_users == 0) throw ConfigError("users", "must be >= 1");
  if (eval_episodes == 0) throw ConfigError("eval_episodes", "must be >= 1");
  try {
    channel.validate();
  } catch (const std::exception& e) {
    throw ConfigError("channel", e.what());
  }
  try {
    td3.validate();
  } catch (const std::exception& e) {
    throw ConfigError("td3", e.what());
  }
  try {
    ppo.validate();
  } catch (const std::exception& e) {
    throw ConfigError("ppo", e.what());
  }
}

EnvConfig ExperimentConfig::env_config() const { return env_config(scenario); }

EnvConfig ExperimentConfig::env_config(ScenarioKind kind) const {
  EnvConfig env;
  env.topology = generate_scenario(kind, n_users, topology_seed);
  env.n_users = n_users;
  env.user_layout = user_layout_for(kind);
  env.channel = channel;
  env.horizon = horizon;
  env.weights = weights;
  env.gamma = td3.gamma;
  return env;
}

std::filesystem::path default_output_dir() {
  if (const char* v = std::getenv("HETNET_OUTPUT_DIR"); v != nullptr && *v != '\0') return v;
  return "runs";
}

ExperimentConfig desk_profile() {
  ExperimentConfig c;
  c.seeds = {0, 10, 18};
  c.episodes = 200;
  c.horizon = 200;
  c.n_users = 20;
  c.eval_episodes = 20;
  c.output_dir = default_output_dir();

  // Compact networks keep 3 seeds x 40k steps near a CPU-hour; rates were
  // picked by greedy evaluation reward on dense-urban, seed 0.
  c.td3.hidden = {64, 64};
  c.td3.lr_actor = 1e-4;
  c.td3.lr_critic = 3e-4;
  c.td3.batch_size = 64;
  c.td3.reward_scale = 0.01;
  c.td3.normalize_rewards = true;

  c.ppo.hidden = {64, 64};
  c.ppo.lr = 1e-3;
  c.ppo.rollout_steps = 250;
  c.ppo.initial_log_std = -0.5;
  c.ppo.reward_scale = 0.01;
  c.ppo.normalize_rewards = true;
  return c;
}

ExperimentConfig paper_profile() {
  ExperimentConfig c;
  c.seeds = {0, 10, 18, 28, 42, 64, 128, 256, 512, 1024};
  c.episodes = 1000;
  c.horizon = 1000;
  c.n_users = 50;
  c.eval_episodes = 20;
  c.output_dir = default_output_dir();
  return c;
}

namespace {

// One binding per configurable field, used both to read and to emit JSON.
struct Field {
  std::function<void(const json&, const std::string&)> set;
  std::function<json()> get;
};

using FieldTable = std::vector<std::pair<std::string, Field>>;

[[noreturn]] void bad(const std::string& key, const std::string& what) { throw ConfigError(key, what); }

double read_double(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) bad(key, "expected a finite number");
  return x;
}

std::uint64_t read_unsigned(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  bad(key, "expected a non-negative integer");
}

Field bind(double& ref) {
  return {[&ref](const json& v, const std::string& k) { ref = read_double(v, k); },
          [&ref] { return json(ref); }};
}

Field bind(std::size_t& ref) {
  return {[&ref](const json& v, const std::string& k) { ref = static_cast<std::size_t>(read_unsigned(v, k)); },
          [&ref] { return json(ref); }};
}

Field bind(int& ref) {
  return {[&ref](const json& v, const std::string& k) {
            if (!v.is_number_integer()) bad(k, "expected an integer");
            ref = v.get<int>();
          },
          [&ref] { return json(ref); }};
}

Field bind(bool& ref) {
  return {[&ref](const json& v, const std::string& k) {
            if (!v.is_boolean()) bad(k, "expected true or false");
            ref = v.get<bool>();
          },
          [&ref] { return json(ref); }};
}

Field bind(std::vector<std::size_t>& ref) {
  return {[&ref](const json& v, const std::string& k) {
            if (!v.is_array() || v.empty()) bad(k, "expected a nonempty array of layer widths");
            std::vector<std::size_t> out;
            for (const auto& x : v) {
              auto w = read_unsigned(x, k);
              if (w == 0) bad(k, "layer widths must be >= 1");
              out.push_back(static_cast<std::size_t>(w));
            }
            ref = std::move(out);
          },
          [&ref] { return json(ref); }};
}

FieldTable channel_fields(ChannelParams& c) {
  return {{"path_loss_exponent", bind(c.path_loss_exponent)},
          {"shadowing_sigma_db", bind(c.shadowing_sigma_db)},
          {"noise_density_dbm_per_hz", bind(c.noise_density_dbm_per_hz)}};
}

FieldTable reward_fields(RewardWeights& w) {
  return {{"kappa", bind(w.kappa)}, {"beta", bind(w.beta)}, {"phi", bind(w.phi)}};
}

FieldTable td3_fields(td3::Td3Config& c) {
  return {{"gamma", bind(c.gamma)},
          {"tau", bind(c.tau)},
          {"policy_delay", bind(c.policy_delay)},
          {"target_noise_sigma", bind(c.target_noise_sigma)},
          {"target_noise_clip", bind(c.target_noise_clip)},
          {"exploration_sigma", bind(c.exploration_sigma)},
          {"batch_size", bind(c.batch_size)},
          {"buffer_capacity", bind(c.buffer_capacity)},
          {"warmup_steps", bind(c.warmup_steps)},
          {"lr_actor", bind(c.lr_actor)},
          {"lr_critic", bind(c.lr_critic)},
          {"reward_scale", bind(c.reward_scale)},
          {"normalize_rewards", bind(c.normalize_rewards)},
          {"hidden", bind(c.hidden)},
          {"prioritized_replay", bind(c.prioritized_replay)},
          {"priority_alpha", bind(c.priority_alpha)},
          {"priority_beta", bind(c.priority_beta)}};
}

FieldTable ppo_fields(ppo::PpoConfig& c) {
  return {{"clip_eps", bind(c.clip_eps)},
          {"gae_lambda", bind(c.gae_lambda)},
          {"gamma", bind(c.gamma)},
          {"rollout_steps", bind(c.rollout_steps)},
          {"epochs", bind(c.epochs)},
          {"minibatch", bind(c.minibatch)},
          {"lr", bind(c.lr)},
          {"value_coef", bind(c.value_coef)},
          {"entropy_coef", bind(c.entropy_coef)},
          {"max_grad_norm", bind(c.max_grad_norm)},
          {"initial_log_std", bind(c.initial_log_std)},
          {"reward_scale", bind(c.reward_scale)},
          {"normalize_rewards", bind(c.normalize_rewards)},
          {"normalize_advantages", bind(c.normalize_advantages)},
          {"hidden", bind(c.hidden)}};
}

Field bind_section(FieldTable table) {
  auto shared = std::make_shared<FieldTable>(std::move(table));
  return {[shared](const json& v, const std::string& key) {
            if (!v.is_object()) bad(key, "expected an object");
            for (const auto& [name, value] : v.items()) {
              auto it = std::find_if(shared->begin(), shared->end(),
                                     [&](const auto& f) { return f.first == name; });
              if (it == shared->end()) bad(key + "." + name, "unknown key");
              it->second.set(value, key + "." + name);
            }
          },
          [shared] {
            json out = json::object();
            for (const auto& [name, f] : *shared) out[name] = f.get();
            return out;
          }};
}

FieldTable top_fields(ExperimentConfig& c) {
  FieldTable t;
  t.emplace_back("scenario", Field{[&c](const json& v, const std::string& k) {
                                     if (!v.is_string()) bad(k, "expected a scenario name");
                                     auto s = parse_scenario(v.get<std::string>());
                                     if (!s) bad(k, "unknown scenario '" + v.get<std::string>() + "'");
                                     c.scenario = *s;
                                   },
                                   [&c] { return json(std::string(to_string(c.scenario))); }});
  t.emplace_back("method", Field{[&c](const json& v, const std::string& k) {
                                   if (!v.is_string()) bad(k, "expected a method name");
                                   auto m = parse_method(v.get<std::string>());
                                   if (!m) bad(k, "unknown method '" + v.get<std::string>() + "'");
                                   c.method = *m;
                                 },
                                 [&c] { return json(std::string(to_string(c.method))); }});
  t.emplace_back("seeds", Field{[&c](const json& v, const std::string& k) {
                                  if (!v.is_array()) bad(k, "expected an array of seeds");
                                  std::vector<std::uint64_t> seeds;
                                  for (const auto& x : v) seeds.push_back(read_unsigned(x, k));
                                  c.seeds = std::move(seeds);
                                },
                                [&c] { return json(c.seeds); }});
  t.emplace_back("episodes", bind(c.episodes));
  t.emplace_back("horizon", bind(c.horizon));
  t.emplace_back("users", bind(c.n_users));
  t.emplace_back("eval_episodes", bind(c.eval_episodes));
  t.emplace_back("topology_seed", Field{[&c](const json& v, const std::string& k) { c.topology_seed = read_unsigned(v, k); },
                                        [&c] { return json(c.topology_seed); }});
  t.emplace_back("output_dir", Field{[&c](const json& v, const std::string& k) {
                                       if (!v.is_string()) bad(k, "expected a path");
                                       c.output_dir = v.get<std::string>();
                                     },
                                     [&c] { return json(c.output_dir.string()); }});
  t.emplace_back("channel", bind_section(channel_fields(c.channel)));
  t.emplace_back("reward", bind_section(reward_fields(c.weights)));
  t.emplace_back("td3", bind_section(td3_fields(c.td3)));
  t.emplace_back("ppo", bind_section(ppo_fields(c.ppo)));
  return t;
}

}  // namespace

void apply_config_json(ExperimentConfig& cfg, const json& j) {
  if (!j.is_object()) bad("<root>", "expected an object");
  if (auto it = j.find("profile"); it != j.end()) {
    if (!it->is_string()) bad("profile", "expected \"desk\" or \"paper\"");
    auto p = it->get<std::string>();
    if (p == "desk") {
      cfg = desk_profile();
    } else if (p == "paper") {
      cfg = paper_profile();
    } else {
      bad("profile", "unknown profile '" + p + "'");
    }
  }
  FieldTable table = top_fields(cfg);
  for (const auto& [name, value] : j.items()) {
    if (name == "profile") continue;
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == name; });
    if (it == table.end()) bad(name, "unknown key");
    it->second.set(value, name);
  }
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("cannot parse config file " + path.string() + ": " + e.what());
  }
  apply_config_json(base, j);
  return base;
}

json to_json(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  json out = json::object();
  for (const auto& [name, f] : top_fields(copy)) out[name] = f.get();
  return out;
}

// ---------------------------------------------------------------------------
// Training and checkpoints

std::filesystem::path seed_dir(const ExperimentConfig& cfg, ScenarioKind scenario, Method method,
                               std::uint64_t seed) {
  return cfg.output_dir / std::string(to_string(scenario)) / std::string(to_string(method)) /
         ("seed-" + std::to_string(seed));
}

std::filesystem::path checkpoint_path(const ExperimentConfig& cfg, ScenarioKind scenario, Method method,
                                      std::uint64_t seed) {
  return seed_dir(cfg, scenario, method, seed) / "policy.txt";
}

std::filesystem::path record_path(const ExperimentConfig& cfg, ScenarioKind scenario, Method method,
                                  std::uint64_t seed) {
  return seed_dir(cfg, scenario, method, seed) / "record.csv";
}

void save_policy_checkpoint(const std::filesystem::path& path, Method method, const neuro::MlpParams* actor,
                            const neuro::GaussianPolicy* gaussian) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  if (method == Method::TD3 && actor != nullptr) {
    out << "hetnet-policy td3\n";
    neuro::save_mlp(out, *actor);
  } else if (method == Method::PPO && gaussian != nullptr) {
    out << "hetnet-policy ppo\n";
    neuro::save_policy(out, *gaussian);
  } else {
    throw ContractViolation("save_policy_checkpoint: method and network do not match");
  }
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
}

std::unique_ptr<Policy> load_policy_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  if (line == "hetnet-policy td3") return std::make_unique<ActorPolicy>(neuro::load_mlp(in));
  if (line == "hetnet-policy ppo") return std::make_unique<GaussianMeanPolicy>(neuro::load_policy(in));
  throw std::runtime_error("unrecognized checkpoint header in " + path.string());
}

std::vector<TrainingRecord> run_training(const ExperimentConfig& cfg) {
  if (!is_learned(cfg.method)) {
    throw ContractViolation("run_training: " + std::string(to_string(cfg.method)) + " is a heuristic and is not trained");
  }
  cfg.validate();
  const EnvConfig env = cfg.env_config();
  const std::size_t total_steps = cfg.episodes * static_cast<std::size_t>(cfg.horizon);

  auto method_dir = cfg.output_dir / std::string(to_string(cfg.scenario)) / std::string(to_string(cfg.method));
  std::filesystem::create_directories(method_dir);
  {
    std::ofstream out(method_dir / "config.json");
    out << to_json(cfg).dump(2) << '\n';
  }

  std::vector<TrainingRecord> records;
  for (std::uint64_t seed : cfg.seeds) {
    TrainingRecord record;
    auto ckpt = checkpoint_path(cfg, cfg.scenario, cfg.method, seed);
    if (cfg.method == Method::TD3) {
      auto res = td3::train(env, cfg.td3, total_steps, seed);
      save_policy_checkpoint(ckpt, Method::TD3, &res.actor, nullptr);
      record = std::move(res.record);
    } else {
      auto res = ppo::train(env, cfg.ppo, total_steps, seed);
      save_policy_checkpoint(ckpt, Method::PPO, nullptr, &res.policy);
      record = std::move(res.record);
    }
    save_record(record_path(cfg, cfg.scenario, cfg.method, seed), record);
    records.push_back(std::move(record));
  }
  return records;
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg, ScenarioKind scenario, Method method,
                                    std::uint64_t seed) {
  switch (method) {
    case Method::GOfdma: return std::make_unique<GOfdmaPolicy>();
    case Method::IpPc: return std::make_unique<IpPcPolicy>();
    case Method::PfEq: return std::make_unique<PfEqPolicy>();
    case Method::TD3:
    case Method::PPO: break;
  }
  auto path = checkpoint_path(cfg, scenario, method, seed);
  if (!std::filesystem::exists(path)) throw MissingCheckpoint(scenario, method, seed, path);
  return load_policy_checkpoint(path);
}

std::vector<EpisodeMetrics> evaluate_policy(Policy& policy, const EnvConfig& env, std::size_t n_episodes,
                                            std::uint64_t seed) {
  return evaluate(env, policy, seed, n_episodes);
}

// ---------------------------------------------------------------------------
// Aggregation and reporting

Estimate summarize(std::span<const double> seed_means) {
  Estimate e;
  if (seed_means.empty()) return e;
  const double n = static_cast<double>(seed_means.size());
  double sum = 0.0;
  for (double x : seed_means) sum += x;
  e.mean = sum / n;
  if (seed_means.size() < 2) return e;
  double ss = 0.0;
  for (double x : seed_means) ss += (x - e.mean) * (x - e.mean);
  e.ci95_halfwidth = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return e;
}

EpisodeMetrics mean_of(std::span<const EpisodeMetrics> rows) {
  EpisodeMetrics m;
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.mean_reward += r.mean_reward;
    m.mean_fairness += r.mean_fairness;
    m.mean_power_norm += r.mean_power_norm;
    m.mean_band_fraction += r.mean_band_fraction;
    m.mean_sched_score += r.mean_sched_score;
    m.steps += r.steps;
  }
  const double n = static_cast<double>(rows.size());
  m.mean_reward /= n;
  m.mean_fairness /= n;
  m.mean_power_norm /= n;
  m.mean_band_fraction /= n;
  m.mean_sched_score /= n;
  return m;
}

MetricSummary aggregate_seeds(const std::vector<std::vector<EpisodeMetrics>>& rows_by_seed) {
  if (rows_by_seed.empty()) throw ContractViolation("aggregate_seeds: no seeds");
  std::vector<EpisodeMetrics> means;
  for (const auto& rows : rows_by_seed) means.push_back(mean_of(rows));
  auto column = [&](double EpisodeMetrics::*field) {
    std::vector<double> v;
    for (const auto& m : means) v.push_back(m.*field);
    return summarize(v);
  };
  MetricSummary s;
  s.mean_band_fraction = column(&EpisodeMetrics::mean_band_fraction);
  s.mean_power_norm = column(&EpisodeMetrics::mean_power_norm);
  s.mean_sched_score = column(&EpisodeMetrics::mean_sched_score);
  s.mean_reward = column(&EpisodeMetrics::mean_reward);
  s.mean_fairness = column(&EpisodeMetrics::mean_fairness);
  s.n_seeds = rows_by_seed.size();
  s.single_seed_warning = rows_by_seed.size() < 2;
  return s;
}

namespace {

void rank_column(std::vector<ComparisonRow>& rows, const std::vector<std::size_t>& idx,
                 Estimate MetricSummary::*field, int ComparisonRow::*rank, bool higher_is_better) {
  std::vector<double> values;
  for (auto i : idx) values.push_back((rows[i].summary.*field).mean);
  std::sort(values.begin(), values.end());
  if (higher_is_better) std::reverse(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  for (auto i : idx) {
    double v = (rows[i].summary.*field).mean;
    rows[i].*rank = !values.empty() && v == values[0] ? 1 : (values.size() > 1 && v == values[1] ? 2 : 0);
  }
}

std::string cell(const Estimate& e) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << e.mean << " ± " << e.ci95_halfwidth;
  return s.str();
}

std::string marked(const Estimate& e, int rank) {
  if (rank == 1) return "**" + cell(e) + "**";
  if (rank == 2) return "<u>" + cell(e) + "</u>";
  return cell(e);
}

}  // namespace

void rank_rows(std::vector<ComparisonRow>& rows) {
  std::vector<ScenarioKind> seen;
  for (const auto& r : rows) {
    if (std::find(seen.begin(), seen.end(), r.scenario) == seen.end()) seen.push_back(r.scenario);
  }
  for (auto sc : seen) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].scenario == sc) idx.push_back(i);
    }
    rank_column(rows, idx, &MetricSummary::mean_band_fraction, &ComparisonRow::band_rank, true);
    rank_column(rows, idx, &MetricSummary::mean_power_norm, &ComparisonRow::power_rank, false);
    rank_column(rows, idx, &MetricSummary::mean_sched_score, &ComparisonRow::score_rank, true);
  }
}

std::vector<ComparisonRow> compare_table(std::span<const ScenarioKind> scenarios,
                                         std::span<const Method> methods, const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ComparisonRow> rows;
  for (auto sc : scenarios) {
    EnvConfig env = cfg.env_config(sc);
    for (auto m : methods) {
      std::vector<std::vector<EpisodeMetrics>> by_seed;
      for (auto seed : cfg.seeds) {
        auto policy = make_policy(cfg, sc, m, seed);
        by_seed.push_back(evaluate_policy(*policy, env, cfg.eval_episodes, seed));
      }
      rows.push_back({sc, m, aggregate_seeds(by_seed)});
    }
  }
  rank_rows(rows);
  return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "scenario,method,bandwidth_mean,bandwidth_ci95,bandwidth_rank,power_mean,power_ci95,power_rank,"
         "score_mean,score_ci95,score_rank,reward_mean,reward_ci95,fairness_mean,fairness_ci95,n_seeds\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << to_string(r.scenario) << ',' << to_string(r.method) << ','
        << format_double(s.mean_band_fraction.mean) << ',' << format_double(s.mean_band_fraction.ci95_halfwidth)
        << ',' << r.band_rank << ',' << format_double(s.mean_power_norm.mean) << ','
        << format_double(s.mean_power_norm.ci95_halfwidth) << ',' << r.power_rank << ','
        << format_double(s.mean_sched_score.mean) << ',' << format_double(s.mean_sched_score.ci95_halfwidth)
        << ',' << r.score_rank << ',' << format_double(s.mean_reward.mean) << ','
        << format_double(s.mean_reward.ci95_halfwidth) << ',' << format_double(s.mean_fairness.mean) << ','
        << format_double(s.mean_fairness.ci95_halfwidth) << ',' << s.n_seeds << '\n';
  }
}

void write_comparison_markdown(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "| Scenario | Method | Bandwidth ↑ | Power ↓ | Scheduling score ↑ | Reward | Fairness |\n"
      << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << "| " << to_string(r.scenario) << " | " << to_string(r.method) << " | "
        << marked(s.mean_band_fraction, r.band_rank) << " | " << marked(s.mean_power_norm, r.power_rank)
        << " | " << marked(s.mean_sched_score, r.score_rank) << " | " << cell(s.mean_reward) << " | "
        << cell(s.mean_fairness) << " |\n";
  }
}

void write_eval_csv(std::ostream& out, std::uint64_t seed, const std::vector<EpisodeMetrics>& rows,
                    bool header) {
  if (header) {
    out << "seed,episode,mean_reward,mean_fairness,mean_power_norm,mean_band_fraction,mean_sched_score,steps\n";
  }
  for (const auto& r : rows) {
    out << seed << ',' << r.episode << ',' << format_double(r.mean_reward) << ','
        << format_double(r.mean_fairness) << ',' << format_double(r.mean_power_norm) << ','
        << format_double(r.mean_band_fraction) << ',' << format_double(r.mean_sched_score) << ',' << r.steps
        << '\n';
  }
}

std::vector<CurvePoint> learning_curve(const std::vector<TrainingRecord>& records) {
  if (records.empty()) throw ContractViolation("learning_curve: no records");
  std::size_t n = records.front().episodes.size();
  for (const auto& r : records) n = std::min(n, r.episodes.size());
  std::vector<CurvePoint> curve;
  curve.reserve(n);
  std::vector<double> values(records.size());
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t i = 0; i < records.size(); ++i) values[i] = records[i].episodes[e].mean_reward;
    Estimate est = summarize(values);
    curve.push_back({records.front().episodes[e].episode, est.mean, est.mean - est.ci95_halfwidth,
                     est.mean + est.ci95_halfwidth});
  }
  return curve;
}

void emit_learning_curve(const std::vector<TrainingRecord>& records, const std::filesystem::path& path) {
  auto curve = learning_curve(records);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write learning curve to " + path.string());
  out << "episode,mean_over_seeds,ci95_lo,ci95_hi\n";
  for (const auto& p : curve) {
    out << p.episode << ',' << format_double(p.mean) << ',' << format_double(p.ci95_lo) << ','
        << format_double(p.ci95_hi) << '\n';
  }
  if (!out) throw std::runtime_error("cannot write learning curve to " + path.string());
}

}  // namespace hetnet
