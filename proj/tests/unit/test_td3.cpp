#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/td3.hpp"

using namespace hetnet;
using namespace hetnet::td3;

namespace {

std::vector<double> filled(std::size_t n, double v) { return std::vector<double>(n, v); }

// Q(s, a) = sum(a): a linear critic that only looks at the action rows.
neuro::MlpParams action_sum_critic(std::size_t state_dim, std::size_t action_dim) {
  neuro::MlpParams p;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(state_dim + action_dim));
  w.rightCols(static_cast<Eigen::Index>(action_dim)).setOnes();
  p.layers.push_back({w, Eigen::VectorXd::Zero(1)});
  p.activations.push_back(neuro::Activation::Linear);
  return p;
}

Td3Config small_config() {
  Td3Config c;
  c.hidden = {16, 16};
  c.batch_size = 8;
  c.warmup_steps = 20;
  c.buffer_capacity = 1000;
  c.lr_actor = 1e-3;
  c.lr_critic = 1e-3;
  return c;
}

}  // namespace

TEST_SUITE("td3") {
  TEST_CASE("clipped double-Q target") {
    CHECK(clipped_double_q_target(1.0, false, 2.0, 3.0, 0.99) == doctest::Approx(2.98).epsilon(1e-15));
    CHECK(clipped_double_q_target(1.0, true, 2.0, 3.0, 0.99) == 1.0);
    Rng rng = make_rng(1);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
      double r = u(rng), q1 = u(rng), q2 = u(rng);
      double y = clipped_double_q_target(r, false, q1, q2, 0.9);
      CHECK(y <= r + 0.9 * q1 + 1e-12);
      CHECK(y <= r + 0.9 * q2 + 1e-12);
    }
  }

  TEST_CASE("replay buffer is a FIFO ring") {
    ReplayBuffer buf(3, 2, 1);
    for (int i = 0; i < 5; ++i) {
      buf.add(filled(2, i), filled(1, i), i, filled(2, i + 1), i == 4);
    }
    CHECK(buf.size() == 3);
    CHECK(buf.capacity() == 3);
    std::vector<double> held;
    for (std::size_t s = 0; s < 3; ++s) held.push_back(buf.at(s).reward);
    std::sort(held.begin(), held.end());
    CHECK(held == std::vector<double>{2.0, 3.0, 4.0});
    CHECK(buf.at(0).reward == 3.0);
    CHECK(buf.at(1).done);
    CHECK(buf.at(1).next_state == filled(2, 5));
  }

  TEST_CASE("uniform sampling covers the buffer and carries done flags") {
    ReplayBuffer buf(10, 1, 1);
    for (int i = 0; i < 10; ++i) buf.add(filled(1, i), filled(1, 0), i, filled(1, i), i % 2 == 0);
    Rng rng = make_rng(2);
    auto b = buf.sample(2000, rng);
    std::vector<int> hits(10, 0);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      int k = static_cast<int>(b.rewards[i]);
      ++hits[k];
      CHECK(b.dones[i] == (k % 2 == 0 ? 1.0 : 0.0));
      CHECK(b.states(0, i) == k);
      CHECK(b.weights[i] == 1.0);
    }
    for (int h : hits) CHECK(h > 120);
  }

  TEST_CASE("target uses the minimum critic and respects done") {
    const std::size_t sd = 2, ad = 3;
    Rng rng = make_rng(3);
    auto actor = neuro::make_mlp({sd, 4, ad}, neuro::Activation::Relu, neuro::Activation::Tanh, rng);
    auto q_sum = action_sum_critic(sd, ad);
    auto q_half = q_sum;
    q_half.layers[0].weight *= 0.5;

    Td3Config cfg;
    cfg.target_noise_sigma = 0.0;
    cfg.gamma = 0.9;
    ReplayBuffer buf(4, sd, ad);
    buf.add(filled(sd, 0.1), filled(ad, 0.5), 2.0, filled(sd, 0.3), false);
    buf.add(filled(sd, 0.1), filled(ad, 0.5), 2.0, filled(sd, 0.3), true);
    TransitionBatch batch;
    batch.states = Eigen::MatrixXd::Constant(sd, 2, 0.1);
    batch.actions = Eigen::MatrixXd::Constant(ad, 2, 0.5);
    batch.rewards = Eigen::VectorXd::Constant(2, 2.0);
    batch.next_states = Eigen::MatrixXd::Constant(sd, 2, 0.3);
    batch.dones = Eigen::VectorXd(2);
    batch.dones << 0.0, 1.0;
    batch.weights = Eigen::VectorXd::Ones(2);

    double a_sum = actor_actions(actor, batch.next_states).col(0).sum();
    auto y = compute_target(batch, actor, q_sum, q_half, cfg, rng);
    CHECK(y[0] == doctest::Approx(2.0 + 0.9 * 0.5 * a_sum).epsilon(1e-12));
    CHECK(y[1] == 2.0);
    auto y_swapped = compute_target(batch, actor, q_half, q_sum, cfg, rng);
    CHECK(y_swapped[0] == y[0]);
  }

  TEST_CASE("target policy smoothing is clipped and clamped to the action box") {
    const std::size_t sd = 2, ad = 4;
    Rng rng = make_rng(4);
    auto actor = neuro::make_mlp({sd, 4, ad}, neuro::Activation::Relu, neuro::Activation::Tanh, rng);
    auto q = action_sum_critic(sd, ad);
    TransitionBatch batch;
    const Eigen::Index n = 500;
    batch.states = Eigen::MatrixXd::Zero(sd, n);
    batch.actions = Eigen::MatrixXd::Zero(ad, n);
    batch.rewards = Eigen::VectorXd::Zero(n);
    batch.next_states = Eigen::MatrixXd::Random(sd, n);
    batch.dones = Eigen::VectorXd::Zero(n);
    batch.weights = Eigen::VectorXd::Ones(n);

    Td3Config wild;
    wild.gamma = 1.0;
    wild.target_noise_sigma = 10.0;
    wild.target_noise_clip = 10.0;
    auto y = compute_target(batch, actor, q, q, wild, rng);
    CHECK(y.minCoeff() >= 0.0);
    CHECK(y.maxCoeff() <= static_cast<double>(ad));
    CHECK(y.maxCoeff() > y.minCoeff());

    Td3Config tight = wild;
    tight.target_noise_clip = 0.01;
    Eigen::MatrixXd base = actor_actions(actor, batch.next_states);
    auto yt = compute_target(batch, actor, q, q, tight, rng);
    for (Eigen::Index i = 0; i < n; ++i) CHECK(std::abs(yt[i] - base.col(i).sum()) <= 0.01 * ad + 1e-12);
  }

  TEST_CASE("actor updates are delayed") {
    Rng rng = make_rng(5);
    auto cfg = small_config();
    cfg.policy_delay = 2;
    auto agent = make_agent(3, 2, cfg, rng);
    ReplayBuffer buf(100, 3, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      buf.add(std::vector<double>{u(rng), u(rng), u(rng)}, std::vector<double>{u(rng), u(rng)}, u(rng),
              std::vector<double>{u(rng), u(rng), u(rng)}, false);
    }
    for (int call = 1; call <= 6; ++call) {
      auto before_actor = agent.actor.layers[0].weight;
      auto before_critic = agent.critic1.layers[0].weight;
      auto before_target = agent.critic1_target.layers[0].weight;
      auto s = update(agent, buf, cfg, rng);
      CHECK(s.ready);
      CHECK(s.actor_updated == (call % 2 == 0));
      CHECK((agent.actor.layers[0].weight != before_actor) == (call % 2 == 0));
      CHECK((agent.critic1_target.layers[0].weight != before_target) == (call % 2 == 0));
      CHECK(agent.critic1.layers[0].weight != before_critic);
    }
  }

  TEST_CASE("update waits for a full batch") {
    Rng rng = make_rng(6);
    auto cfg = small_config();
    auto agent = make_agent(2, 1, cfg, rng);
    ReplayBuffer buf(100, 2, 1);
    for (std::size_t i = 0; i + 1 < cfg.batch_size; ++i) buf.add(filled(2, 0), filled(1, 0), 0, filled(2, 0), false);
    auto before = agent.critic1.layers[0].weight;
    CHECK_FALSE(update(agent, buf, cfg, rng).ready);
    CHECK(agent.critic1.layers[0].weight == before);
    CHECK(agent.update_calls == 0);
  }

  TEST_CASE("with gamma 0 the critic regresses onto the reward") {
    Rng rng = make_rng(7);
    auto cfg = small_config();
    cfg.gamma = 0.0;
    cfg.batch_size = 1;
    cfg.lr_critic = 1e-3;
    auto agent = make_agent(2, 2, cfg, rng);
    ReplayBuffer buf(1, 2, 2);
    std::vector<double> s{0.2, 0.7}, a{0.4, 0.9};
    buf.add(s, a, 1.5, s, false);
    for (int i = 0; i < 3000; ++i) update(agent, buf, cfg, rng);
    cfg.lr_critic = 1e-5;
    for (int i = 0; i < 500; ++i) update(agent, buf, cfg, rng);
    Eigen::VectorXd in(4);
    in << 0.2, 0.7, 0.4, 0.9;
    CHECK(std::abs(neuro::mlp_predict(agent.critic1, in)[0] - 1.5) < 1e-3);
    CHECK(std::abs(neuro::mlp_predict(agent.critic2, in)[0] - 1.5) < 1e-3);
  }

  TEST_CASE("select_action: deterministic at zero noise, spread at sigma") {
    Rng rng = make_rng(8);
    auto actor = neuro::make_mlp({3, 8, 2}, neuro::Activation::Relu, neuro::Activation::Tanh, rng);
    for (auto& l : actor.layers) {
      l.weight.setZero();
      l.bias.setZero();
    }
    std::vector<double> s{0.1, 0.2, 0.3};
    auto a0 = select_action(actor, s, 0.0, rng);
    CHECK(a0 == std::vector<double>{0.5, 0.5});
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      auto a = select_action(actor, s, 0.1, rng);
      for (double x : a) CHECK((x >= 0.0 && x <= 1.0));
      sum += a[0] - 0.5;
      sq += (a[0] - 0.5) * (a[0] - 0.5);
    }
    CHECK(std::abs(sum / n) < 0.005);
    CHECK(std::sqrt(sq / n) == doctest::Approx(0.1).epsilon(0.03));
  }

  TEST_CASE("training is deterministic per seed and counts updates") {
    auto env = testing::tiny_env(10);
    auto cfg = small_config();
    auto a = train(env, cfg, 200, 42);
    auto b = train(env, cfg, 200, 42);
    auto c = train(env, cfg, 200, 43);
    CHECK(a.updates == 200 - cfg.warmup_steps);
    CHECK(a.record.episodes.size() == 20);
    CHECK(a.record.total_steps() == 200);
    CHECK(a.actor.layers[0].weight == b.actor.layers[0].weight);
    CHECK(a.record.episodes[19].mean_reward == b.record.episodes[19].mean_reward);
    CHECK(a.actor.layers[0].weight != c.actor.layers[0].weight);
    CHECK(a.actor.all_finite());
  }

  TEST_CASE("config validation") {
    Td3Config c;
    CHECK_NOTHROW(c.validate());
    c.gamma = 1.5;
    CHECK_THROWS(c.validate());
    c = {};
    c.tau = 0.0;
    CHECK_THROWS(c.validate());
    c = {};
    c.batch_size = 0;
    CHECK_THROWS(c.validate());
    c = {};
    c.policy_delay = 0;
    CHECK_THROWS(c.validate());
  }
}
