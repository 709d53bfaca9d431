#include "hetnet/policy.hpp"

#include <random>

#include "hetnet/errors.hpp"

namespace hetnet {
namespace {

Eigen::VectorXd state_column(const HetNetEnv& env) {
  const auto& s = env.state();
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

ActionVector to_action(const Eigen::VectorXd& v) { return ActionVector(v.data(), v.data() + v.size()); }

}  // namespace

ActionVector GOfdmaPolicy::act(const HetNetEnv& env) {
  return g_ofdma_policy(env.observed_gains(), env.topology());
}

ActionVector IpPcPolicy::act(const HetNetEnv& env) {
  return ip_pc_policy(env.observed_gains(), env.topology());
}

void PfEqPolicy::begin_episode(const HetNetEnv& env) { pf_ = PfState::initial(env.topology().n_users()); }

ActionVector PfEqPolicy::act(const HetNetEnv& env) {
  if (pf_.avg_rate.size() != env.topology().n_users()) begin_episode(env);
  std::vector<double> last = env.last_throughput_mbps();
  if (last.size() != pf_.avg_rate.size()) last.assign(pf_.avg_rate.size(), 0.0);
  auto [action, next] = pf_eq_policy(env.observed_gains(), last, std::move(pf_), env.topology(),
                                     env.config().channel);
  pf_ = std::move(next);
  return action;
}

ActionVector ActorPolicy::act(const HetNetEnv& env) {
  Eigen::VectorXd out = neuro::mlp_predict(actor_, state_column(env));
  return to_action(neuro::to_unit_interval(out));
}

ActionVector GaussianMeanPolicy::act(const HetNetEnv& env) {
  Eigen::MatrixXd mean = neuro::policy_mean(policy_, state_column(env));
  return to_action(mean.col(0));
}

ActionVector RandomPolicy::act(const HetNetEnv& env) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ActionVector a(env.action_dim());
  for (auto& x : a) x = u(rng_);
  return a;
}

ActionVector ConstantPolicy::act(const HetNetEnv& env) {
  if (action_.size() != env.action_dim()) throw ContractViolation("constant policy: action length mismatch");
  return action_;
}

EpisodeMetrics run_episode(HetNetEnv& env, Policy& policy, std::uint64_t episode_seed,
                           std::size_t episode_index) {
  env.reset(episode_seed);
  policy.begin_episode(env);
  EpisodeAccumulator acc;
  for (;;) {
    ActionVector a = policy.act(env);
    StepOutcome out = env.step(a);
    acc.add(out);
    if (out.done) break;
  }
  return acc.finish(episode_index);
}

std::vector<EpisodeMetrics> evaluate(const EnvConfig& config, Policy& policy, std::uint64_t run_seed,
                                     std::size_t n_episodes) {
  if (n_episodes == 0) throw ContractViolation("evaluate: n_episodes must be >= 1");
  HetNetEnv env(config);
  std::vector<EpisodeMetrics> rows;
  rows.reserve(n_episodes);
  for (std::size_t e = 0; e < n_episodes; ++e) {
    rows.push_back(run_episode(env, policy, evaluation_episode_seed(run_seed, e), e));
  }
  return rows;
}

}  // namespace hetnet
