#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/rng.hpp"

// Fixed-chain multilayer perceptrons in double precision. Batches are column
// major: an input matrix is [input_dim x batch].
namespace hetnet::neuro {

enum class Activation { Linear, Tanh, Relu };

struct DenseLayer {
  Eigen::MatrixXd weight;  // [out x in]
  Eigen::VectorXd bias;    // [out]
};

struct MlpParams {
  std::vector<DenseLayer> layers;
  std::vector<Activation> activations;  // one per layer, last is the output activation

  std::size_t input_dim() const { return static_cast<std::size_t>(layers.front().weight.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(layers.back().weight.rows()); }
  std::size_t parameter_count() const;
  bool all_finite() const;
  bool same_shape(const MlpParams& other) const;
};

// sizes = {input, hidden..., output}. Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
MlpParams make_mlp(std::span<const std::size_t> sizes, Activation hidden, Activation output, Rng& rng);
MlpParams make_mlp(std::initializer_list<std::size_t> sizes, Activation hidden, Activation output,
                   Rng& rng);

struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;   // input to each layer
  std::vector<Eigen::MatrixXd> outputs;  // post-activation of each layer
};

struct MlpForward {
  Eigen::MatrixXd output;
  MlpCache cache;
};

struct MlpGrads {
  std::vector<DenseLayer> layers;
  Eigen::MatrixXd input;  // d(output . upstream)/d(input), [input_dim x batch]
};

Eigen::MatrixXd mlp_predict(const MlpParams& params, const Eigen::MatrixXd& input);
Eigen::VectorXd mlp_predict(const MlpParams& params, const Eigen::VectorXd& input);
MlpForward mlp_forward(const MlpParams& params, const Eigen::MatrixXd& input);

// Reverse-mode gradients of sum(output .* upstream), summed over the batch.
MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Eigen::MatrixXd& upstream);

MlpGrads zero_grads(const MlpParams& params);
double grad_norm_squared(const MlpGrads& grads);
void scale_grads(MlpGrads& grads, double factor);

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam(const MlpParams& params, double beta1 = 0.9, double beta2 = 0.999,
                    double eps = 1e-8);

// Bias-corrected Adam descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(AdamState& opt, MlpParams& params, const MlpGrads& grads, double lr);

struct VectorAdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

VectorAdamState make_vector_adam(Eigen::Index size);
void adam_step(VectorAdamState& opt, Eigen::VectorXd& params, const Eigen::VectorXd& grads, double lr);

// target <- tau * online + (1 - tau) * target
void soft_update(MlpParams& target, const MlpParams& online, double tau);

// Tanh outputs in (-1, 1) mapped to actions in (0, 1).
inline Eigen::MatrixXd to_unit_interval(const Eigen::MatrixXd& tanh_out) {
  return (tanh_out.array() + 1.0) * 0.5;
}

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian with a state-independent log standard deviation. The mean
// network ends in Tanh and is mapped to [0, 1].
struct GaussianPolicy {
  MlpParams mean_net;
  Eigen::VectorXd log_std;

  Eigen::VectorXd clamped_log_std() const {
    return log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  }
};

Eigen::MatrixXd policy_mean(const GaussianPolicy& policy, const Eigen::MatrixXd& states);

struct GaussianSample {
  Eigen::VectorXd action;
  double log_prob = 0.0;
};

GaussianSample gaussian_sample(const GaussianPolicy& policy, const Eigen::VectorXd& state, Rng& rng);

// Column-wise log densities of actions under N(mean, exp(log_std)^2).
Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& mean, const Eigen::VectorXd& log_std,
                                  const Eigen::MatrixXd& actions);
double gaussian_entropy(const Eigen::VectorXd& log_std);

// Text checkpoints with shortest round-trip decimal encoding.
void save_mlp(std::ostream& out, const MlpParams& params);
MlpParams load_mlp(std::istream& in);
void save_policy(std::ostream& out, const GaussianPolicy& policy);
GaussianPolicy load_policy(std::istream& in);

}  // namespace hetnet::neuro
