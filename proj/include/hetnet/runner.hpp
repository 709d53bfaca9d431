#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hetnet/env.hpp"
#include "hetnet/policy.hpp"
#include "hetnet/ppo.hpp"
#include "hetnet/record.hpp"
#include "hetnet/td3.hpp"
#include "hetnet/topology.hpp"

namespace hetnet {

enum class Method { TD3, PPO, GOfdma, IpPc, PfEq };

inline constexpr Method kAllMethods[] = {Method::TD3, Method::PPO, Method::GOfdma, Method::IpPc,
                                         Method::PfEq};
inline constexpr Method kHeuristicMethods[] = {Method::GOfdma, Method::IpPc, Method::PfEq};

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view text);
inline bool is_learned(Method m) { return m == Method::TD3 || m == Method::PPO; }

// Names the offending key, e.g. "td3.batch_size: expected a positive integer".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class MissingCheckpoint : public std::runtime_error {
 public:
  MissingCheckpoint(ScenarioKind scenario, Method method, std::uint64_t seed,
                    const std::filesystem::path& path);
};

struct ExperimentConfig {
  ScenarioKind scenario = ScenarioKind::DenseUrban;
  Method method = Method::TD3;
  std::vector<std::uint64_t> seeds;
  std::size_t episodes = 200;
  int horizon = 200;
  std::size_t n_users = 20;
  std::size_t eval_episodes = 20;
  std::uint64_t topology_seed = 0;  // only Mixed draws station positions from it
  ChannelParams channel;
  RewardWeights weights;
  td3::Td3Config td3;
  ppo::PpoConfig ppo;
  std::filesystem::path output_dir = "runs";

  void validate() const;
  EnvConfig env_config() const;
  EnvConfig env_config(ScenarioKind kind) const;
};

// 3 seeds, 200 x 200 steps, 20 users, compact networks.
ExperimentConfig desk_profile();
// 10 seeds, 1000 x 1000 steps, 50 users, the paper's hyperparameters.
ExperimentConfig paper_profile();

// Output root: $HETNET_OUTPUT_DIR when set, else "runs".
std::filesystem::path default_output_dir();

// Applies a nested JSON object on top of cfg. A "profile" key ("desk" or
// "paper") replaces cfg with that profile first.
void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j);
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base);
nlohmann::json to_json(const ExperimentConfig& cfg);

std::filesystem::path seed_dir(const ExperimentConfig& cfg, ScenarioKind scenario, Method method,
                               std::uint64_t seed);
std::filesystem::path checkpoint_path(const ExperimentConfig& cfg, ScenarioKind scenario, Method method,
                                      std::uint64_t seed);
std::filesystem::path record_path(const ExperimentConfig& cfg, ScenarioKind scenario, Method method,
                                  std::uint64_t seed);

// Trains cfg.method on cfg.scenario for each seed, writing a checkpoint and a
// record per seed plus the resolved config.
std::vector<TrainingRecord> run_training(const ExperimentConfig& cfg);

// First line "hetnet-policy td3" or "hetnet-policy ppo", then the network.
void save_policy_checkpoint(const std::filesystem::path& path, Method method,
                            const neuro::MlpParams* actor, const neuro::GaussianPolicy* gaussian);
std::unique_ptr<Policy> load_policy_checkpoint(const std::filesystem::path& path);

// Heuristics are built directly; learned methods load their seed's checkpoint.
std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg, ScenarioKind scenario, Method method,
                                    std::uint64_t seed);

std::vector<EpisodeMetrics> evaluate_policy(Policy& policy, const EnvConfig& env, std::size_t n_episodes,
                                            std::uint64_t seed);

struct Estimate {
  double mean = 0.0;
  double ci95_halfwidth = 0.0;
};

// Mean of the values and 1.96 * sample std / sqrt(n); halfwidth 0 for n < 2.
Estimate summarize(std::span<const double> seed_means);

struct MetricSummary {
  Estimate mean_band_fraction;
  Estimate mean_power_norm;
  Estimate mean_sched_score;
  Estimate mean_reward;
  Estimate mean_fairness;
  std::size_t n_seeds = 0;
  bool single_seed_warning = false;
};

EpisodeMetrics mean_of(std::span<const EpisodeMetrics> rows);
MetricSummary aggregate_seeds(const std::vector<std::vector<EpisodeMetrics>>& rows_by_seed);

struct ComparisonRow {
  ScenarioKind scenario;
  Method method;
  MetricSummary summary;
  // 1 for best, 2 for second best within the scenario, else 0.
  int band_rank = 0;
  int power_rank = 0;
  int score_rank = 0;
};

// Ranks bandwidth and scheduling score high-is-best, power low-is-best.
void rank_rows(std::vector<ComparisonRow>& rows);

std::vector<ComparisonRow> compare_table(std::span<const ScenarioKind> scenarios,
                                         std::span<const Method> methods, const ExperimentConfig& cfg);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
void write_comparison_markdown(std::ostream& out, const std::vector<ComparisonRow>& rows);

void write_eval_csv(std::ostream& out, std::uint64_t seed, const std::vector<EpisodeMetrics>& rows,
                    bool header);

struct CurvePoint {
  std::size_t episode = 0;
  double mean = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
};

// One point per episode index present in every record.
std::vector<CurvePoint> learning_curve(const std::vector<TrainingRecord>& records);
void emit_learning_curve(const std::vector<TrainingRecord>& records, const std::filesystem::path& path);

}  // namespace hetnet
