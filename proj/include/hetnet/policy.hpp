#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hetnet/baselines.hpp"
#include "hetnet/env.hpp"
#include "hetnet/neuro.hpp"
#include "hetnet/record.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

// A controller that maps what the environment exposes to a raw action.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const HetNetEnv& env) { (void)env; }
  virtual ActionVector act(const HetNetEnv& env) = 0;
};

class GOfdmaPolicy final : public Policy {
 public:
  std::string name() const override { return "g-ofdma"; }
  ActionVector act(const HetNetEnv& env) override;
};

class IpPcPolicy final : public Policy {
 public:
  std::string name() const override { return "ip-pc"; }
  ActionVector act(const HetNetEnv& env) override;
};

class PfEqPolicy final : public Policy {
 public:
  std::string name() const override { return "pf-eq"; }
  void begin_episode(const HetNetEnv& env) override;
  ActionVector act(const HetNetEnv& env) override;
  const PfState& state() const { return pf_; }

 private:
  PfState pf_;
};

// Deterministic TD3 actor.
class ActorPolicy final : public Policy {
 public:
  explicit ActorPolicy(neuro::MlpParams actor) : actor_(std::move(actor)) {}
  std::string name() const override { return "td3"; }
  ActionVector act(const HetNetEnv& env) override;

 private:
  neuro::MlpParams actor_;
};

// PPO evaluated at its Gaussian mean.
class GaussianMeanPolicy final : public Policy {
 public:
  explicit GaussianMeanPolicy(neuro::GaussianPolicy policy) : policy_(std::move(policy)) {}
  std::string name() const override { return "ppo"; }
  ActionVector act(const HetNetEnv& env) override;

 private:
  neuro::GaussianPolicy policy_;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(make_rng(seed, 31)) {}
  std::string name() const override { return "random"; }
  ActionVector act(const HetNetEnv& env) override;

 private:
  Rng rng_;
};

class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(ActionVector action) : action_(std::move(action)) {}
  std::string name() const override { return "constant"; }
  ActionVector act(const HetNetEnv& env) override;

 private:
  ActionVector action_;
};

// Resets env with the given seed and plays one full episode.
EpisodeMetrics run_episode(HetNetEnv& env, Policy& policy, std::uint64_t episode_seed,
                           std::size_t episode_index = 0);

// Held-out evaluation episodes, seeded from the evaluation stream of run_seed.
std::vector<EpisodeMetrics> evaluate(const EnvConfig& config, Policy& policy, std::uint64_t run_seed,
                                     std::size_t n_episodes);

}  // namespace hetnet
