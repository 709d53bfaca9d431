#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/env.hpp"
#include "hetnet/neuro.hpp"
#include "hetnet/record.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/stats.hpp"

namespace hetnet::ppo {

struct PpoConfig {
  double clip_eps = 0.2;
  double gae_lambda = 0.95;
  double gamma = 0.99;
  std::size_t rollout_steps = 2048;
  int epochs = 10;
  std::size_t minibatch = 64;
  double lr = 2e-5;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  double initial_log_std = -1.0;
  // Multiplies rewards before advantage and return computation.
  double reward_scale = 1.0;
  // Standardize rewards with running moments of every reward seen so far.
  bool normalize_rewards = false;
  bool normalize_advantages = true;
  std::vector<std::size_t> hidden = {256, 256};

  void validate() const;
};

struct Rollout {
  Eigen::MatrixXd states;   // [state_dim x T]
  Eigen::MatrixXd actions;  // [action_dim x T], unclamped samples
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;
  Eigen::VectorXd values;
  Eigen::VectorXd dones;
  double next_value = 0.0;  // critic value of the state following the last step

  Eigen::Index size() const { return rewards.size(); }
};

struct PpoAgent {
  neuro::GaussianPolicy policy;
  neuro::MlpParams critic;
  neuro::AdamState policy_opt;
  neuro::VectorAdamState log_std_opt;
  neuro::AdamState critic_opt;
  RunningMoments reward_stats;
};

PpoAgent make_agent(std::size_t state_dim, std::size_t action_dim, const PpoConfig& cfg, Rng& rng);

Rollout collect_rollout(EpisodeStream& stream, const neuro::GaussianPolicy& policy,
                        const neuro::MlpParams& critic, std::size_t steps, Rng& rng);

struct Advantages {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

// Generalized advantage estimation, not normalized.
Advantages compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                       const Eigen::VectorXd& dones, double next_value, double gamma, double lambda);

void normalize_advantages(Eigen::VectorXd& advantages);

// min(r * A, clip(r, 1 - eps, 1 + eps) * A)
double clipped_surrogate_term(double ratio, double advantage, double clip_eps);

struct LossResult {
  double loss = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  Eigen::VectorXd ratios;
  neuro::MlpGrads policy_grads;
  Eigen::VectorXd log_std_grad;
  neuro::MlpGrads critic_grads;
};

// Loss = -surrogate + value_coef * mean((V - R)^2) - entropy_coef * entropy.
LossResult ppo_loss(const neuro::GaussianPolicy& policy, const neuro::MlpParams& critic,
                    const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                    const Eigen::VectorXd& old_log_probs, const Eigen::VectorXd& advantages,
                    const Eigen::VectorXd& returns, const PpoConfig& cfg);

struct UpdateStats {
  double mean_ratio = 1.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double first_minibatch_max_ratio_deviation = 0.0;
  double value_loss = 0.0;
  std::size_t minibatch_steps = 0;
};

UpdateStats update(PpoAgent& agent, const Rollout& rollout, const PpoConfig& cfg, Rng& rng);

struct TrainResult {
  neuro::GaussianPolicy policy;
  neuro::MlpParams critic;
  TrainingRecord record;
  std::size_t updates = 0;
};

TrainResult train(const EnvConfig& env_config, const PpoConfig& cfg, std::size_t total_steps,
                  std::uint64_t seed);

}  // namespace hetnet::ppo
