#include "hetnet/td3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hetnet/errors.hpp"

namespace hetnet::td3 {
namespace {

Eigen::MatrixXd stack_rows(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

// Critic step on the (importance-weighted) mean squared Bellman error; returns
// the loss and leaves the per-sample TD errors in td_error.
double critic_step(neuro::MlpParams& critic, neuro::AdamState& opt, const Eigen::MatrixXd& inputs,
                   const Eigen::VectorXd& targets, const Eigen::VectorXd& weights, double lr,
                   Eigen::VectorXd* td_error) {
  auto fwd = neuro::mlp_forward(critic, inputs);
  Eigen::VectorXd diff = fwd.output.row(0).transpose() - targets;
  const double n = static_cast<double>(targets.size());
  double loss = (weights.array() * diff.array().square()).sum() / n;
  Eigen::MatrixXd upstream = (2.0 / n) * (weights.array() * diff.array()).matrix().transpose();
  auto grads = neuro::mlp_backward(critic, fwd.cache, upstream);
  neuro::adam_step(opt, critic, grads, lr);
  if (td_error != nullptr) *td_error = std::move(diff);
  return loss;
}

}  // namespace

void Td3Config::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("td3.gamma must be in [0,1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("td3.tau must be in (0,1]");
  if (policy_delay < 1) throw std::invalid_argument("td3.policy_delay must be >= 1");
  if (!(target_noise_clip > 0.0)) throw std::invalid_argument("td3.target_noise_clip must be > 0");
  if (target_noise_sigma < 0.0 || exploration_sigma < 0.0) {
    throw std::invalid_argument("td3 noise scales must be >= 0");
  }
  if (batch_size == 0) throw std::invalid_argument("td3.batch_size must be >= 1");
  if (buffer_capacity < batch_size) throw std::invalid_argument("td3.buffer_capacity must be >= batch_size");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw std::invalid_argument("td3 learning rates must be > 0");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("td3.reward_scale must be > 0");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim,
                           bool prioritized, double alpha)
    : capacity_(capacity),
      state_dim_(state_dim),
      action_dim_(action_dim),
      prioritized_(prioritized),
      alpha_(alpha),
      states_(static_cast<Eigen::Index>(state_dim), static_cast<Eigen::Index>(capacity)),
      actions_(static_cast<Eigen::Index>(action_dim), static_cast<Eigen::Index>(capacity)),
      rewards_(static_cast<Eigen::Index>(capacity)),
      next_states_(static_cast<Eigen::Index>(state_dim), static_cast<Eigen::Index>(capacity)),
      dones_(static_cast<Eigen::Index>(capacity)) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
  if (prioritized_) {
    while (leaves_ < capacity_) leaves_ *= 2;
    tree_.assign(2 * leaves_, 0.0);
  }
}

void ReplayBuffer::add(std::span<const double> state, std::span<const double> action, double reward,
                       std::span<const double> next_state, bool done) {
  if (state.size() != state_dim_ || next_state.size() != state_dim_ || action.size() != action_dim_) {
    throw ContractViolation("ReplayBuffer::add: transition dimensions do not match the buffer");
  }
  auto c = static_cast<Eigen::Index>(cursor_);
  states_.col(c) = Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
  actions_.col(c) = Eigen::Map<const Eigen::VectorXd>(action.data(), static_cast<Eigen::Index>(action.size()));
  next_states_.col(c) =
      Eigen::Map<const Eigen::VectorXd>(next_state.data(), static_cast<Eigen::Index>(next_state.size()));
  rewards_[c] = reward;
  dones_[c] = done ? 1.0 : 0.0;
  if (prioritized_) set_priority(cursor_, max_priority_);
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Transition ReplayBuffer::at(std::size_t slot) const {
  if (slot >= size_) throw ContractViolation("ReplayBuffer::at: slot out of range");
  auto c = static_cast<Eigen::Index>(slot);
  Transition t;
  t.state.assign(states_.col(c).data(), states_.col(c).data() + state_dim_);
  t.action.assign(actions_.col(c).data(), actions_.col(c).data() + action_dim_);
  t.next_state.assign(next_states_.col(c).data(), next_states_.col(c).data() + state_dim_);
  t.reward = rewards_[c];
  t.done = dones_[c] != 0.0;
  return t;
}

void ReplayBuffer::set_priority(std::size_t slot, double priority) {
  std::size_t node = leaves_ + slot;
  tree_[node] = std::pow(priority, alpha_);
  for (node /= 2; node >= 1; node /= 2) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
}

std::size_t ReplayBuffer::find_prefix(double mass) const {
  std::size_t node = 1;
  while (node < leaves_) {
    if (mass < tree_[2 * node] || tree_[2 * node + 1] <= 0.0) {
      node = 2 * node;
    } else {
      mass -= tree_[2 * node];
      node = 2 * node + 1;
    }
  }
  return std::min(node - leaves_, size_ - 1);
}

TransitionBatch ReplayBuffer::sample(std::size_t batch_size, Rng& rng, double beta) const {
  if (size_ == 0) throw ContractViolation("ReplayBuffer::sample: buffer is empty");
  auto n = static_cast<Eigen::Index>(batch_size);
  TransitionBatch b;
  b.states.resize(static_cast<Eigen::Index>(state_dim_), n);
  b.actions.resize(static_cast<Eigen::Index>(action_dim_), n);
  b.next_states.resize(static_cast<Eigen::Index>(state_dim_), n);
  b.rewards.resize(n);
  b.dones.resize(n);
  b.weights = Eigen::VectorXd::Ones(n);
  b.slots.resize(batch_size);

  std::uniform_int_distribution<std::size_t> uniform(0, size_ - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double total = prioritized_ ? tree_total() : 0.0;
  double max_weight = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t slot = prioritized_ ? find_prefix(unit(rng) * total) : uniform(rng);
    b.slots[static_cast<std::size_t>(i)] = slot;
    auto c = static_cast<Eigen::Index>(slot);
    b.states.col(i) = states_.col(c);
    b.actions.col(i) = actions_.col(c);
    b.next_states.col(i) = next_states_.col(c);
    b.rewards[i] = rewards_[c];
    b.dones[i] = dones_[c];
    if (prioritized_) {
      double p = tree_[leaves_ + slot] / total;
      b.weights[i] = std::pow(static_cast<double>(size_) * p, -beta);
      max_weight = std::max(max_weight, b.weights[i]);
    }
  }
  if (prioritized_ && max_weight > 0.0) b.weights /= max_weight;
  return b;
}

void ReplayBuffer::update_priorities(std::span<const std::size_t> slots, std::span<const double> td_errors) {
  if (!prioritized_) return;
  if (slots.size() != td_errors.size()) throw ContractViolation("update_priorities: length mismatch");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    double p = std::abs(td_errors[i]) + 1e-6;
    max_priority_ = std::max(max_priority_, p);
    set_priority(slots[i], p);
  }
}

Td3Agent make_agent(std::size_t state_dim, std::size_t action_dim, const Td3Config& cfg, Rng& rng) {
  using neuro::Activation;
  std::vector<std::size_t> actor_sizes{state_dim};
  actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  actor_sizes.push_back(action_dim);
  std::vector<std::size_t> critic_sizes{state_dim + action_dim};
  critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  critic_sizes.push_back(1);

  Td3Agent a;
  a.actor = neuro::make_mlp(actor_sizes, Activation::Relu, Activation::Tanh, rng);
  a.critic1 = neuro::make_mlp(critic_sizes, Activation::Relu, Activation::Linear, rng);
  a.critic2 = neuro::make_mlp(critic_sizes, Activation::Relu, Activation::Linear, rng);
  a.actor_target = a.actor;
  a.critic1_target = a.critic1;
  a.critic2_target = a.critic2;
  a.actor_opt = neuro::make_adam(a.actor);
  a.critic1_opt = neuro::make_adam(a.critic1);
  a.critic2_opt = neuro::make_adam(a.critic2);
  return a;
}

Eigen::MatrixXd actor_actions(const neuro::MlpParams& actor, const Eigen::MatrixXd& states) {
  return neuro::to_unit_interval(neuro::mlp_predict(actor, states));
}

ActionVector select_action(const neuro::MlpParams& actor, std::span<const double> state,
                           double exploration_sigma, Rng& rng) {
  Eigen::MatrixXd s = Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
  Eigen::VectorXd a = actor_actions(actor, s).col(0);
  ActionVector out(static_cast<std::size_t>(a.size()));
  std::normal_distribution<double> noise(0.0, exploration_sigma > 0.0 ? exploration_sigma : 1.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double v = a[i] + (exploration_sigma > 0.0 ? noise(rng) : 0.0);
    out[static_cast<std::size_t>(i)] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

double clipped_double_q_target(double reward, bool done, double q1, double q2, double gamma) {
  return done ? reward : reward + gamma * std::min(q1, q2);
}

Eigen::VectorXd compute_target(const TransitionBatch& batch, const neuro::MlpParams& target_actor,
                               const neuro::MlpParams& target_critic1,
                               const neuro::MlpParams& target_critic2, const Td3Config& cfg, Rng& rng) {
  if (batch.size() == 0) throw ContractViolation("compute_target: empty batch");
  Eigen::MatrixXd next_actions = actor_actions(target_actor, batch.next_states);
  if (cfg.target_noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.target_noise_sigma);
    for (Eigen::Index i = 0; i < next_actions.size(); ++i) {
      double eps = std::clamp(noise(rng), -cfg.target_noise_clip, cfg.target_noise_clip);
      next_actions.data()[i] += eps;
    }
  }
  next_actions = next_actions.cwiseMax(0.0).cwiseMin(1.0);
  Eigen::MatrixXd inputs = stack_rows(batch.next_states, next_actions);
  Eigen::MatrixXd q1 = neuro::mlp_predict(target_critic1, inputs);
  Eigen::MatrixXd q2 = neuro::mlp_predict(target_critic2, inputs);
  Eigen::VectorXd y(batch.size());
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    y[i] = clipped_double_q_target(cfg.reward_scale * batch.rewards[i], batch.dones[i] != 0.0, q1(0, i),
                                   q2(0, i), cfg.gamma);
  }
  return y;
}

UpdateStats update(Td3Agent& agent, ReplayBuffer& buffer, const Td3Config& cfg, Rng& rng) {
  UpdateStats stats;
  if (buffer.size() < cfg.batch_size) return stats;
  stats.ready = true;
  ++agent.update_calls;

  TransitionBatch batch = buffer.sample(cfg.batch_size, rng, cfg.priority_beta);
  if (cfg.normalize_rewards) {
    for (Eigen::Index i = 0; i < batch.size(); ++i) batch.rewards[i] = agent.reward_stats.normalize(batch.rewards[i]);
  }
  Eigen::VectorXd y = compute_target(batch, agent.actor_target, agent.critic1_target,
                                     agent.critic2_target, cfg, rng);
  Eigen::MatrixXd inputs = stack_rows(batch.states, batch.actions);
  Eigen::VectorXd td_error;
  stats.critic1_loss =
      critic_step(agent.critic1, agent.critic1_opt, inputs, y, batch.weights, cfg.lr_critic, &td_error);
  stats.critic2_loss =
      critic_step(agent.critic2, agent.critic2_opt, inputs, y, batch.weights, cfg.lr_critic, nullptr);
  if (buffer.prioritized()) {
    buffer.update_priorities(batch.slots, std::span<const double>(td_error.data(), batch.slots.size()));
  }

  if (agent.update_calls % cfg.policy_delay == 0) {
    const auto state_dim = batch.states.rows();
    const double n = static_cast<double>(batch.size());
    auto actor_fwd = neuro::mlp_forward(agent.actor, batch.states);
    Eigen::MatrixXd actions = neuro::to_unit_interval(actor_fwd.output);
    auto critic_fwd = neuro::mlp_forward(agent.critic1, stack_rows(batch.states, actions));
    stats.actor_objective = critic_fwd.output.mean();
    // Ascend mean Q1(s, pi(s)) by descending its negation.
    Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(1, batch.size(), -1.0 / n);
    auto critic_grads = neuro::mlp_backward(agent.critic1, critic_fwd.cache, upstream);
    Eigen::MatrixXd action_grad = 0.5 * critic_grads.input.bottomRows(critic_grads.input.rows() - state_dim);
    auto actor_grads = neuro::mlp_backward(agent.actor, actor_fwd.cache, action_grad);
    neuro::adam_step(agent.actor_opt, agent.actor, actor_grads, cfg.lr_actor);

    neuro::soft_update(agent.actor_target, agent.actor, cfg.tau);
    neuro::soft_update(agent.critic1_target, agent.critic1, cfg.tau);
    neuro::soft_update(agent.critic2_target, agent.critic2, cfg.tau);
    stats.actor_updated = true;
  }
  return stats;
}

TrainResult train(const EnvConfig& env_config, const Td3Config& cfg, std::size_t total_steps,
                  std::uint64_t seed) {
  cfg.validate();
  HetNetEnv env(env_config);
  Rng init_rng = make_rng(seed, 101);
  Rng rng = make_rng(seed, 102);
  Td3Agent agent = make_agent(env.state_dim(), env.action_dim(), cfg, init_rng);
  ReplayBuffer buffer(cfg.buffer_capacity, env.state_dim(), env.action_dim(), cfg.prioritized_replay,
                      cfg.priority_alpha);
  EpisodeStream stream(env, seed);

  TrainResult result;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ActionVector action(env.action_dim());
  for (std::size_t t = 0; t < total_steps; ++t) {
    StateVector state = stream.state();
    if (t < cfg.warmup_steps) {
      for (auto& a : action) a = unit(rng);
    } else {
      action = select_action(agent.actor, state, cfg.exploration_sigma, rng);
    }
    StepOutcome out = stream.step(action);
    buffer.add(state, action, out.reward, out.next_state, out.done);
    agent.reward_stats.push(out.reward);
    if (t >= cfg.warmup_steps && update(agent, buffer, cfg, rng).ready) ++result.updates;
  }
  result.actor = std::move(agent.actor);
  result.record.seed = seed;
  result.record.episodes = stream.take_finished();
  return result;
}

}  // namespace hetnet::td3
