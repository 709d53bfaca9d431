#include "hetnet/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hetnet/errors.hpp"

namespace hetnet::ppo {
namespace {

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(idx[j]));
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, std::span<const std::size_t> idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out[static_cast<Eigen::Index>(j)] = v[static_cast<Eigen::Index>(idx[j])];
  return out;
}

}  // namespace

void PpoConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw std::invalid_argument("ppo.clip_eps must be in (0,1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw std::invalid_argument("ppo.gae_lambda must be in [0,1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("ppo.gamma must be in [0,1)");
  if (rollout_steps == 0) throw std::invalid_argument("ppo.rollout_steps must be >= 1");
  if (epochs < 0) throw std::invalid_argument("ppo.epochs must be >= 0");
  if (minibatch == 0) throw std::invalid_argument("ppo.minibatch must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("ppo.lr must be > 0");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("ppo.reward_scale must be > 0");
}

PpoAgent make_agent(std::size_t state_dim, std::size_t action_dim, const PpoConfig& cfg, Rng& rng) {
  using neuro::Activation;
  std::vector<std::size_t> actor_sizes{state_dim};
  actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  actor_sizes.push_back(action_dim);
  std::vector<std::size_t> critic_sizes{state_dim};
  critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  critic_sizes.push_back(1);

  PpoAgent a;
  a.policy.mean_net = neuro::make_mlp(actor_sizes, Activation::Relu, Activation::Tanh, rng);
  a.policy.log_std = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(action_dim), cfg.initial_log_std);
  a.critic = neuro::make_mlp(critic_sizes, Activation::Relu, Activation::Linear, rng);
  a.policy_opt = neuro::make_adam(a.policy.mean_net);
  a.log_std_opt = neuro::make_vector_adam(a.policy.log_std.size());
  a.critic_opt = neuro::make_adam(a.critic);
  return a;
}

Rollout collect_rollout(EpisodeStream& stream, const neuro::GaussianPolicy& policy,
                        const neuro::MlpParams& critic, std::size_t steps, Rng& rng) {
  if (steps == 0) throw ContractViolation("collect_rollout: T must be >= 1");
  const auto sd = static_cast<Eigen::Index>(stream.env().state_dim());
  const auto ad = static_cast<Eigen::Index>(stream.env().action_dim());
  const auto T = static_cast<Eigen::Index>(steps);
  Rollout r;
  r.states.resize(sd, T);
  r.actions.resize(ad, T);
  r.log_probs.resize(T);
  r.rewards.resize(T);
  r.values.resize(T);
  r.dones.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(stream.state().data(), sd);
    auto sample = neuro::gaussian_sample(policy, s, rng);
    r.values[t] = neuro::mlp_predict(critic, s)[0];
    r.states.col(t) = s;
    r.actions.col(t) = sample.action;
    r.log_probs[t] = sample.log_prob;
    StepOutcome out = stream.step(std::span<const double>(sample.action.data(), static_cast<std::size_t>(ad)));
    r.rewards[t] = out.reward;
    r.dones[t] = out.done ? 1.0 : 0.0;
  }
  Eigen::VectorXd last = Eigen::Map<const Eigen::VectorXd>(stream.state().data(), sd);
  r.next_value = neuro::mlp_predict(critic, last)[0];
  return r;
}

Advantages compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                       const Eigen::VectorXd& dones, double next_value, double gamma, double lambda) {
  const auto T = rewards.size();
  if (values.size() != T || dones.size() != T) throw ContractViolation("compute_gae: length mismatch");
  Advantages out{Eigen::VectorXd(T), Eigen::VectorXd(T)};
  double running = 0.0;
  for (Eigen::Index t = T; t-- > 0;) {
    double next_v = t + 1 < T ? values[t + 1] : next_value;
    double live = 1.0 - dones[t];
    double delta = rewards[t] + gamma * next_v * live - values[t];
    running = delta + gamma * lambda * live * running;
    out.advantages[t] = running;
  }
  out.returns = out.advantages + values;
  return out;
}

void normalize_advantages(Eigen::VectorXd& advantages) {
  if (advantages.size() < 2) return;
  double mean = advantages.mean();
  double var = (advantages.array() - mean).square().mean();
  advantages = (advantages.array() - mean) / (std::sqrt(var) + 1e-8);
}

double clipped_surrogate_term(double ratio, double advantage, double clip_eps) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantage);
}

LossResult ppo_loss(const neuro::GaussianPolicy& policy, const neuro::MlpParams& critic,
                    const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                    const Eigen::VectorXd& old_log_probs, const Eigen::VectorXd& advantages,
                    const Eigen::VectorXd& returns, const PpoConfig& cfg) {
  const auto M = states.cols();
  if (M == 0) throw ContractViolation("ppo_loss: empty minibatch");
  if (actions.cols() != M || old_log_probs.size() != M || advantages.size() != M || returns.size() != M) {
    throw ContractViolation("ppo_loss: minibatch components differ in length");
  }
  const double inv_m = 1.0 / static_cast<double>(M);

  LossResult res;
  auto fwd = neuro::mlp_forward(policy.mean_net, states);
  Eigen::MatrixXd mean = neuro::to_unit_interval(fwd.output);
  Eigen::VectorXd log_std = policy.clamped_log_std();
  Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  Eigen::VectorXd log_probs = neuro::gaussian_log_prob(mean, log_std, actions);
  res.ratios = (log_probs - old_log_probs).array().exp();

  // d(-surrogate)/d(log_prob) per sample; zero where the clipped branch is active.
  Eigen::VectorXd dlogp(M);
  std::size_t clipped = 0;
  double surrogate = 0.0;
  for (Eigen::Index j = 0; j < M; ++j) {
    double r = res.ratios[j];
    double adv = advantages[j];
    double unclipped = r * adv;
    double term = clipped_surrogate_term(r, adv, cfg.clip_eps);
    surrogate += term;
    if (std::abs(r - 1.0) > cfg.clip_eps) ++clipped;
    dlogp[j] = unclipped <= term ? -inv_m * r * adv : 0.0;
  }
  res.surrogate = surrogate * inv_m;
  res.clip_fraction = static_cast<double>(clipped) * inv_m;
  res.entropy = neuro::gaussian_entropy(log_std);

  Eigen::ArrayXXd diff = actions.array() - mean.array();
  Eigen::ArrayXXd z = diff.colwise() * inv_var;  // (a - mu) / sigma^2
  Eigen::MatrixXd mean_upstream = 0.5 * (z.rowwise() * dlogp.transpose().array()).matrix();
  res.policy_grads = neuro::mlp_backward(policy.mean_net, fwd.cache, mean_upstream);

  Eigen::ArrayXXd dlogp_dlogstd = (diff.square().colwise() * inv_var) - 1.0;
  res.log_std_grad = (dlogp_dlogstd.rowwise() * dlogp.transpose().array()).rowwise().sum().matrix();
  res.log_std_grad.array() -= cfg.entropy_coef;
  for (Eigen::Index i = 0; i < log_std.size(); ++i) {
    if (policy.log_std[i] < neuro::kLogStdMin || policy.log_std[i] > neuro::kLogStdMax) res.log_std_grad[i] = 0.0;
  }

  auto vfwd = neuro::mlp_forward(critic, states);
  Eigen::VectorXd verr = vfwd.output.row(0).transpose() - returns;
  res.value_loss = verr.squaredNorm() * inv_m;
  Eigen::MatrixXd vupstream = (2.0 * cfg.value_coef * inv_m) * verr.transpose();
  res.critic_grads = neuro::mlp_backward(critic, vfwd.cache, vupstream);

  res.loss = -res.surrogate + cfg.value_coef * res.value_loss - cfg.entropy_coef * res.entropy;
  return res;
}

UpdateStats update(PpoAgent& agent, const Rollout& rollout, const PpoConfig& cfg, Rng& rng) {
  UpdateStats stats;
  const auto T = rollout.size();
  if (T == 0) throw ContractViolation("ppo update: empty rollout");
  Eigen::VectorXd rewards = rollout.rewards;
  if (cfg.normalize_rewards) {
    for (Eigen::Index t = 0; t < T; ++t) agent.reward_stats.push(rewards[t]);
    for (Eigen::Index t = 0; t < T; ++t) rewards[t] = agent.reward_stats.normalize(rewards[t]);
  }
  rewards *= cfg.reward_scale;
  Advantages gae = compute_gae(rewards, rollout.values, rollout.dones, rollout.next_value, cfg.gamma,
                               cfg.gae_lambda);
  if (cfg.normalize_advantages) normalize_advantages(gae.advantages);

  std::vector<std::size_t> order(static_cast<std::size_t>(T));
  std::iota(order.begin(), order.end(), 0);
  double ratio_sum = 0.0;
  double clip_sum = 0.0;
  double value_sum = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
      std::span<const std::size_t> idx(order.data() + start, std::min(cfg.minibatch, order.size() - start));
      auto loss = ppo_loss(agent.policy, agent.critic, gather_columns(rollout.states, idx),
                           gather_columns(rollout.actions, idx), gather(rollout.log_probs, idx),
                           gather(gae.advantages, idx), gather(gae.returns, idx), cfg);
      if (stats.minibatch_steps == 0) {
        stats.first_minibatch_max_ratio_deviation = (loss.ratios.array() - 1.0).abs().maxCoeff();
      }
      ratio_sum += loss.ratios.mean();
      clip_sum += loss.clip_fraction;
      value_sum += loss.value_loss;

      if (cfg.max_grad_norm > 0.0) {
        double pnorm = std::sqrt(neuro::grad_norm_squared(loss.policy_grads) + loss.log_std_grad.squaredNorm());
        if (pnorm > cfg.max_grad_norm) {
          double f = cfg.max_grad_norm / pnorm;
          neuro::scale_grads(loss.policy_grads, f);
          loss.log_std_grad *= f;
        }
        double cnorm = std::sqrt(neuro::grad_norm_squared(loss.critic_grads));
        if (cnorm > cfg.max_grad_norm) neuro::scale_grads(loss.critic_grads, cfg.max_grad_norm / cnorm);
      }
      neuro::adam_step(agent.policy_opt, agent.policy.mean_net, loss.policy_grads, cfg.lr);
      neuro::adam_step(agent.log_std_opt, agent.policy.log_std, loss.log_std_grad, cfg.lr);
      agent.policy.log_std = agent.policy.clamped_log_std();
      neuro::adam_step(agent.critic_opt, agent.critic, loss.critic_grads, cfg.lr);
      ++stats.minibatch_steps;
    }
  }
  if (stats.minibatch_steps > 0) {
    double n = static_cast<double>(stats.minibatch_steps);
    stats.mean_ratio = ratio_sum / n;
    stats.clip_fraction = clip_sum / n;
    stats.value_loss = value_sum / n;
  }

  Eigen::MatrixXd mean = neuro::policy_mean(agent.policy, rollout.states);
  Eigen::VectorXd new_log_probs = neuro::gaussian_log_prob(mean, agent.policy.clamped_log_std(), rollout.actions);
  Eigen::ArrayXd log_ratio = (new_log_probs - rollout.log_probs).array();
  // k3 estimator of KL(old || new): E_old[(r - 1) - log r], nonnegative per sample.
  stats.approx_kl = ((log_ratio.exp() - 1.0) - log_ratio).mean();
  return stats;
}

TrainResult train(const EnvConfig& env_config, const PpoConfig& cfg, std::size_t total_steps,
                  std::uint64_t seed) {
  cfg.validate();
  HetNetEnv env(env_config);
  Rng init_rng = make_rng(seed, 201);
  Rng rng = make_rng(seed, 202);
  PpoAgent agent = make_agent(env.state_dim(), env.action_dim(), cfg, init_rng);
  EpisodeStream stream(env, seed);

  TrainResult result;
  std::size_t consumed = 0;
  while (consumed < total_steps) {
    std::size_t steps = std::min(cfg.rollout_steps, total_steps - consumed);
    Rollout rollout = collect_rollout(stream, agent.policy, agent.critic, steps, rng);
    update(agent, rollout, cfg, rng);
    consumed += steps;
    ++result.updates;
  }
  result.policy = std::move(agent.policy);
  result.critic = std::move(agent.critic);
  result.record.seed = seed;
  result.record.episodes = stream.take_finished();
  return result;
}

}  // namespace hetnet::ppo
