#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/env.hpp"
#include "hetnet/neuro.hpp"
#include "hetnet/record.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/stats.hpp"

namespace hetnet::td3 {

struct Td3Config {
  double gamma = 0.99;
  double tau = 0.005;
  int policy_delay = 2;
  double target_noise_sigma = 0.2;
  double target_noise_clip = 0.5;
  double exploration_sigma = 0.1;
  std::size_t batch_size = 256;
  std::size_t buffer_capacity = 100000;
  std::size_t warmup_steps = 1000;
  double lr_actor = 2e-5;
  double lr_critic = 2e-5;
  // Multiplies rewards inside the Bellman target; 1 keeps raw reward units.
  double reward_scale = 1.0;
  // Standardize rewards with running moments of every reward seen so far.
  bool normalize_rewards = false;
  std::vector<std::size_t> hidden = {256, 256};
  bool prioritized_replay = false;
  double priority_alpha = 0.6;
  double priority_beta = 0.4;

  void validate() const;
};

struct Transition {
  StateVector state;
  ActionVector action;
  double reward = 0.0;
  StateVector next_state;
  bool done = false;
};

struct TransitionBatch {
  Eigen::MatrixXd states;       // [state_dim x B]
  Eigen::MatrixXd actions;      // [action_dim x B]
  Eigen::VectorXd rewards;
  Eigen::MatrixXd next_states;
  Eigen::VectorXd dones;        // 1.0 for terminal transitions
  Eigen::VectorXd weights;      // importance weights, all ones for uniform sampling
  std::vector<std::size_t> slots;

  Eigen::Index size() const { return rewards.size(); }
};

// Fixed-capacity FIFO ring. Sampling is uniform with replacement, or
// proportional to priority^alpha when prioritized.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim,
               bool prioritized = false, double alpha = 0.6);

  void add(std::span<const double> state, std::span<const double> action, double reward,
           std::span<const double> next_state, bool done);
  void add(const Transition& t) { add(t.state, t.action, t.reward, t.next_state, t.done); }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool prioritized() const { return prioritized_; }
  Transition at(std::size_t slot) const;

  TransitionBatch sample(std::size_t batch_size, Rng& rng, double beta = 0.4) const;
  void update_priorities(std::span<const std::size_t> slots, std::span<const double> td_errors);

 private:
  double tree_total() const { return tree_[1]; }
  void set_priority(std::size_t slot, double priority);
  std::size_t find_prefix(double mass) const;

  std::size_t capacity_;
  std::size_t state_dim_;
  std::size_t action_dim_;
  bool prioritized_;
  double alpha_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  Eigen::MatrixXd states_;
  Eigen::MatrixXd actions_;
  Eigen::VectorXd rewards_;
  Eigen::MatrixXd next_states_;
  Eigen::VectorXd dones_;
  // Sum tree over priority^alpha, leaves at [leaves_, 2 * leaves_).
  std::size_t leaves_ = 1;
  std::vector<double> tree_;
  double max_priority_ = 1.0;
};

struct Td3Agent {
  neuro::MlpParams actor;
  neuro::MlpParams actor_target;
  neuro::MlpParams critic1;
  neuro::MlpParams critic2;
  neuro::MlpParams critic1_target;
  neuro::MlpParams critic2_target;
  neuro::AdamState actor_opt;
  neuro::AdamState critic1_opt;
  neuro::AdamState critic2_opt;
  long update_calls = 0;
  RunningMoments reward_stats;  // fed by train(), read when normalize_rewards is set
};

Td3Agent make_agent(std::size_t state_dim, std::size_t action_dim, const Td3Config& cfg, Rng& rng);

// Deterministic actor output in [0, 1]^action_dim, column per state.
Eigen::MatrixXd actor_actions(const neuro::MlpParams& actor, const Eigen::MatrixXd& states);

ActionVector select_action(const neuro::MlpParams& actor, std::span<const double> state,
                           double exploration_sigma, Rng& rng);

// y = r + gamma * (1 - done) * min(q1, q2)
double clipped_double_q_target(double reward, bool done, double q1, double q2, double gamma);

Eigen::VectorXd compute_target(const TransitionBatch& batch, const neuro::MlpParams& target_actor,
                               const neuro::MlpParams& target_critic1,
                               const neuro::MlpParams& target_critic2, const Td3Config& cfg, Rng& rng);

struct UpdateStats {
  bool ready = false;  // false when the buffer holds fewer than batch_size transitions
  bool actor_updated = false;
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  double actor_objective = 0.0;
};

UpdateStats update(Td3Agent& agent, ReplayBuffer& buffer, const Td3Config& cfg, Rng& rng);

struct TrainResult {
  neuro::MlpParams actor;
  TrainingRecord record;
  std::size_t updates = 0;
};

TrainResult train(const EnvConfig& env_config, const Td3Config& cfg, std::size_t total_steps,
                  std::uint64_t seed);

}  // namespace hetnet::td3
