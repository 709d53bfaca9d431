#include "hetnet/neuro.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "hetnet/errors.hpp"

namespace hetnet::neuro {
namespace {

void activate(Activation act, Eigen::MatrixXd& x) {
  switch (act) {
    case Activation::Linear: break;
    case Activation::Tanh: x = x.array().tanh(); break;
    case Activation::Relu: x = x.cwiseMax(0.0); break;
  }
}

// Multiplies grad in place by the activation derivative, expressed through the output y.
void apply_derivative(Activation act, const Eigen::MatrixXd& y, Eigen::MatrixXd& grad) {
  switch (act) {
    case Activation::Linear: break;
    case Activation::Tanh: grad.array() *= 1.0 - y.array().square(); break;
    case Activation::Relu: grad.array() *= (y.array() > 0.0).cast<double>(); break;
  }
}

void adam_block(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::Ref<const Eigen::MatrixXd>& grad,
                Eigen::Ref<Eigen::MatrixXd> m, Eigen::Ref<Eigen::MatrixXd> v, double beta1, double beta2,
                double eps, double bc1, double bc2, double lr) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
  param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

std::string_view activation_name(Activation act) {
  switch (act) {
    case Activation::Linear: return "linear";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
  }
  return "linear";
}

Activation parse_activation(const std::string& name) {
  if (name == "linear") return Activation::Linear;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw std::runtime_error("checkpoint: unknown activation '" + name + "'");
}

void write_values(std::ostream& out, const double* data, Eigen::Index n) {
  char buf[64];
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), data[i]);
    if (i) out << ' ';
    out.write(buf, ptr - buf);
  }
  out << '\n';
}

void expect_token(std::istream& in, const std::string& expected) {
  std::string token;
  if (!(in >> token) || token != expected) {
    throw std::runtime_error("checkpoint: expected '" + expected + "', found '" + token + "'");
  }
}

void read_values(std::istream& in, double* data, Eigen::Index n) {
  std::string token;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(in >> token)) throw std::runtime_error("checkpoint: truncated value list");
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), data[i]);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw std::runtime_error("checkpoint: bad number '" + token + "'");
    }
  }
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool MlpParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool MlpParams::same_shape(const MlpParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weight.rows() != other.layers[i].weight.rows() ||
        layers[i].weight.cols() != other.layers[i].weight.cols()) {
      return false;
    }
  }
  return true;
}

MlpParams make_mlp(std::span<const std::size_t> sizes, Activation hidden, Activation output, Rng& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output sizes");
  MlpParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    auto in = static_cast<Eigen::Index>(sizes[l]);
    auto out = static_cast<Eigen::Index>(sizes[l + 1]);
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> init(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = init(rng);
    for (Eigen::Index i = 0; i < out; ++i) layer.bias[i] = init(rng);
    p.layers.push_back(std::move(layer));
    p.activations.push_back(l + 2 == sizes.size() ? output : hidden);
  }
  return p;
}

MlpParams make_mlp(std::initializer_list<std::size_t> sizes, Activation hidden, Activation output,
                   Rng& rng) {
  return make_mlp(std::span<const std::size_t>(sizes.begin(), sizes.size()), hidden, output, rng);
}

Eigen::MatrixXd mlp_predict(const MlpParams& params, const Eigen::MatrixXd& input) {
  if (static_cast<std::size_t>(input.rows()) != params.input_dim()) {
    throw ContractViolation("mlp_predict: input dimension " + std::to_string(input.rows()) +
                            " does not match " + std::to_string(params.input_dim()));
  }
  Eigen::MatrixXd x = input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Eigen::MatrixXd z = layer.weight * x;
    z.colwise() += layer.bias;
    activate(params.activations[l], z);
    x = std::move(z);
  }
  return x;
}

Eigen::VectorXd mlp_predict(const MlpParams& params, const Eigen::VectorXd& input) {
  return mlp_predict(params, Eigen::MatrixXd(input)).col(0);
}

MlpForward mlp_forward(const MlpParams& params, const Eigen::MatrixXd& input) {
  if (static_cast<std::size_t>(input.rows()) != params.input_dim()) {
    throw ContractViolation("mlp_forward: input dimension " + std::to_string(input.rows()) +
                            " does not match " + std::to_string(params.input_dim()));
  }
  MlpForward fwd;
  fwd.cache.inputs.reserve(params.layers.size());
  fwd.cache.outputs.reserve(params.layers.size());
  const Eigen::MatrixXd* x = &input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    fwd.cache.inputs.push_back(*x);
    Eigen::MatrixXd z = layer.weight * *x;
    z.colwise() += layer.bias;
    activate(params.activations[l], z);
    fwd.cache.outputs.push_back(std::move(z));
    x = &fwd.cache.outputs.back();
  }
  fwd.output = fwd.cache.outputs.back();
  return fwd;
}

MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Eigen::MatrixXd& upstream) {
  const auto n = params.layers.size();
  if (cache.inputs.size() != n || cache.outputs.size() != n) {
    throw ContractViolation("mlp_backward: cache depth does not match parameters");
  }
  for (std::size_t l = 0; l < n; ++l) {
    if (cache.inputs[l].rows() != params.layers[l].weight.cols() ||
        cache.outputs[l].rows() != params.layers[l].weight.rows() ||
        cache.inputs[l].cols() != upstream.cols()) {
      throw ContractViolation("mlp_backward: stale or mismatched forward cache");
    }
  }
  if (upstream.rows() != cache.outputs.back().rows()) {
    throw ContractViolation("mlp_backward: upstream gradient shape mismatch");
  }

  MlpGrads grads;
  grads.layers.resize(n);
  Eigen::MatrixXd delta = upstream;
  for (std::size_t l = n; l-- > 0;) {
    apply_derivative(params.activations[l], cache.outputs[l], delta);
    grads.layers[l].weight.noalias() = delta * cache.inputs[l].transpose();
    grads.layers[l].bias = delta.rowwise().sum();
    Eigen::MatrixXd next = params.layers[l].weight.transpose() * delta;
    delta = std::move(next);
  }
  grads.input = std::move(delta);
  return grads;
}

MlpGrads zero_grads(const MlpParams& params) {
  MlpGrads g;
  for (const auto& l : params.layers) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

double grad_norm_squared(const MlpGrads& grads) {
  double s = 0.0;
  for (const auto& l : grads.layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return s;
}

void scale_grads(MlpGrads& grads, double factor) {
  for (auto& l : grads.layers) {
    l.weight *= factor;
    l.bias *= factor;
  }
}

AdamState make_adam(const MlpParams& params, double beta1, double beta2, double eps) {
  AdamState s;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  auto zeros = zero_grads(params);
  s.m = zeros.layers;
  s.v = std::move(zeros.layers);
  return s;
}

void adam_step(AdamState& opt, MlpParams& params, const MlpGrads& grads, double lr) {
  if (opt.m.size() != params.layers.size() || grads.layers.size() != params.layers.size()) {
    throw ContractViolation("adam_step: optimizer, params and grads differ in depth");
  }
  ++opt.t;
  double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
  double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    if (g.weight.rows() != p.weight.rows() || g.weight.cols() != p.weight.cols()) {
      throw ContractViolation("adam_step: gradient shape mismatch");
    }
    adam_block(p.weight, g.weight, opt.m[l].weight, opt.v[l].weight, opt.beta1, opt.beta2, opt.eps,
               bc1, bc2, lr);
    adam_block(p.bias, g.bias, opt.m[l].bias, opt.v[l].bias, opt.beta1, opt.beta2, opt.eps, bc1, bc2, lr);
  }
}

VectorAdamState make_vector_adam(Eigen::Index size) {
  VectorAdamState s;
  s.m = Eigen::VectorXd::Zero(size);
  s.v = Eigen::VectorXd::Zero(size);
  return s;
}

void adam_step(VectorAdamState& opt, Eigen::VectorXd& params, const Eigen::VectorXd& grads, double lr) {
  if (params.size() != grads.size() || opt.m.size() != params.size()) {
    throw ContractViolation("adam_step: vector shape mismatch");
  }
  ++opt.t;
  double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
  double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
  adam_block(params, grads, opt.m, opt.v, opt.beta1, opt.beta2, opt.eps, bc1, bc2, lr);
}

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
  if (!target.same_shape(online)) throw ContractViolation("soft_update: shape mismatch");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].weight = tau * online.layers[l].weight + (1.0 - tau) * target.layers[l].weight;
    target.layers[l].bias = tau * online.layers[l].bias + (1.0 - tau) * target.layers[l].bias;
  }
}

Eigen::MatrixXd policy_mean(const GaussianPolicy& policy, const Eigen::MatrixXd& states) {
  return to_unit_interval(mlp_predict(policy.mean_net, states));
}

GaussianSample gaussian_sample(const GaussianPolicy& policy, const Eigen::VectorXd& state, Rng& rng) {
  Eigen::VectorXd mean = policy_mean(policy, Eigen::MatrixXd(state)).col(0);
  Eigen::VectorXd log_std = policy.clamped_log_std();
  if (log_std.size() != mean.size()) throw ContractViolation("gaussian_sample: log_std size mismatch");
  std::normal_distribution<double> noise(0.0, 1.0);
  GaussianSample s;
  s.action.resize(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) s.action[i] = mean[i] + std::exp(log_std[i]) * noise(rng);
  s.log_prob = gaussian_log_prob(mean, log_std, s.action)[0];
  return s;
}

Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& mean, const Eigen::VectorXd& log_std,
                                  const Eigen::MatrixXd& actions) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  Eigen::VectorXd out(actions.cols());
  double norm = log_std.sum() + half_log_2pi * static_cast<double>(log_std.size());
  for (Eigen::Index c = 0; c < actions.cols(); ++c) {
    Eigen::ArrayXd diff = actions.col(c).array() - mean.col(c).array();
    out[c] = -0.5 * (diff.square() * inv_var).sum() - norm;
  }
  return out;
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return log_std.sum() + 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e) *
                             static_cast<double>(log_std.size());
}

void save_mlp(std::ostream& out, const MlpParams& params) {
  out << "hetnet-mlp 1\n";
  out << "layers " << params.layers.size() << '\n';
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    out << "dense " << layer.weight.rows() << ' ' << layer.weight.cols() << ' '
        << activation_name(params.activations[l]) << '\n';
    // Row-major weights.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = layer.weight;
    write_values(out, rm.data(), rm.size());
    write_values(out, layer.bias.data(), layer.bias.size());
  }
}

MlpParams load_mlp(std::istream& in) {
  expect_token(in, "hetnet-mlp");
  int version = 0;
  if (!(in >> version) || version != 1) throw std::runtime_error("checkpoint: unsupported mlp version");
  expect_token(in, "layers");
  std::size_t n = 0;
  if (!(in >> n) || n == 0) throw std::runtime_error("checkpoint: bad layer count");
  MlpParams p;
  for (std::size_t l = 0; l < n; ++l) {
    expect_token(in, "dense");
    Eigen::Index rows = 0, cols = 0;
    std::string act;
    if (!(in >> rows >> cols >> act) || rows <= 0 || cols <= 0) {
      throw std::runtime_error("checkpoint: bad layer header");
    }
    if (!p.layers.empty() && p.layers.back().weight.rows() != cols) {
      throw std::runtime_error("checkpoint: layer dimensions do not chain");
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    read_values(in, rm.data(), rm.size());
    DenseLayer layer{rm, Eigen::VectorXd(rows)};
    read_values(in, layer.bias.data(), rows);
    p.layers.push_back(std::move(layer));
    p.activations.push_back(parse_activation(act));
  }
  return p;
}

void save_policy(std::ostream& out, const GaussianPolicy& policy) {
  save_mlp(out, policy.mean_net);
  out << "log_std " << policy.log_std.size() << '\n';
  write_values(out, policy.log_std.data(), policy.log_std.size());
}

GaussianPolicy load_policy(std::istream& in) {
  GaussianPolicy p;
  p.mean_net = load_mlp(in);
  expect_token(in, "log_std");
  Eigen::Index n = 0;
  if (!(in >> n) || n != static_cast<Eigen::Index>(p.mean_net.output_dim())) {
    throw std::runtime_error("checkpoint: log_std size does not match the mean network");
  }
  p.log_std.resize(n);
  read_values(in, p.log_std.data(), n);
  return p;
}

}  // namespace hetnet::neuro
