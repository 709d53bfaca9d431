#include "hetnet/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "hetnet/errors.hpp"

namespace hetnet {
namespace {

double clamp01(double x) {
  if (!(x >= 0.0)) return 0.0;  // also catches NaN
  return std::min(x, 1.0);
}

double normalize_power(const BaseStation& bs, double p_mw) {
  return (p_mw - bs.p_min_mw) / (bs.p_max_mw - bs.p_min_mw);
}

}  // namespace

void EnvConfig::validate() const {
  topology.validate(/*require_users=*/user_layout == UserLayout::Fixed);
  channel.validate();
  if (users() == 0) throw std::invalid_argument("EnvConfig: at least one user required");
  if (user_layout == UserLayout::Fixed && n_users != 0 && n_users != topology.n_users()) {
    throw std::invalid_argument("EnvConfig: fixed layout needs n_users == topology users");
  }
  if (horizon < 1) throw std::invalid_argument("EnvConfig: horizon must be >= 1");
  if (weights.kappa < 0.0 || weights.beta < 0.0 || weights.phi < 0.0) {
    throw std::invalid_argument("EnvConfig: reward weights must be >= 0");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("EnvConfig: gamma must be in [0,1)");
}

Eigen::MatrixXi PhysicalAllocation::association() const {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(powers_mw.size()),
                                            static_cast<Eigen::Index>(serving.size()));
  for (std::size_t u = 0; u < serving.size(); ++u) {
    a(static_cast<Eigen::Index>(serving[u]), static_cast<Eigen::Index>(u)) = 1;
  }
  return a;
}

std::size_t PhysicalAllocation::users_served_by(std::size_t station) const {
  return static_cast<std::size_t>(std::count(serving.begin(), serving.end(), station));
}

std::vector<std::size_t> associate_strongest(std::span<const double> powers_mw,
                                             const Eigen::MatrixXd& gains,
                                             const NetworkTopology& topology) {
  const auto nb = topology.n_stations();
  std::vector<std::size_t> serving(static_cast<std::size_t>(gains.cols()), 0);
  for (Eigen::Index u = 0; u < gains.cols(); ++u) {
    std::size_t best = 0;
    double best_rx = powers_mw[0] * gains(0, u);
    for (std::size_t b = 1; b < nb; ++b) {
      double rx = powers_mw[b] * gains(static_cast<Eigen::Index>(b), u);
      if (rx > best_rx ||
          (rx == best_rx && topology.stations[b].id < topology.stations[best].id)) {
        best = b;
        best_rx = rx;
      }
    }
    serving[static_cast<std::size_t>(u)] = best;
  }
  return serving;
}

PhysicalAllocation decode_action(std::span<const double> raw, const NetworkTopology& topology,
                                 const Eigen::MatrixXd& gains) {
  EnvLayout layout{topology.n_stations(), topology.n_users()};
  if (raw.size() != layout.action_dim()) {
    throw ContractViolation("decode_action: expected " + std::to_string(layout.action_dim()) +
                            " action entries, got " + std::to_string(raw.size()));
  }
  if (static_cast<std::size_t>(gains.rows()) != layout.n_stations ||
      static_cast<std::size_t>(gains.cols()) != layout.n_users) {
    throw ContractViolation("decode_action: gain matrix does not match topology");
  }
  const auto nb = layout.n_stations;
  const auto nu = layout.n_users;

  PhysicalAllocation alloc;
  alloc.powers_mw.resize(nb);
  alloc.power_norm.resize(nb);
  alloc.band_fractions.resize(nb);
  alloc.sched_scores.resize(nu);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& bs = topology.stations[b];
    double a_p = clamp01(raw[layout.p_adj_offset() + b]);
    alloc.power_norm[b] = a_p;
    alloc.powers_mw[b] = bs.p_min_mw + a_p * (bs.p_max_mw - bs.p_min_mw);
    alloc.band_fractions[b] = clamp01(raw[layout.w_alloc_offset() + b]);
  }
  for (std::size_t u = 0; u < nu; ++u) alloc.sched_scores[u] = clamp01(raw[layout.score_offset() + u]);

  alloc.serving = associate_strongest(alloc.powers_mw, gains, topology);

  std::vector<double> score_sum(nb, 0.0);
  for (std::size_t u = 0; u < nu; ++u) score_sum[alloc.serving[u]] += alloc.sched_scores[u] + kScoreEpsilon;
  alloc.user_bands_hz.resize(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    std::size_t b = alloc.serving[u];
    double share = (alloc.sched_scores[u] + kScoreEpsilon) / score_sum[b];
    alloc.user_bands_hz[u] = alloc.band_fractions[b] * topology.stations[b].band_total_hz * share;
  }
  return alloc;
}

double jain_fairness(std::span<const double> z) {
  if (z.empty()) throw ContractViolation("jain_fairness: empty input");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : z) {
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0.0) return 1.0;
  return sum * sum / (static_cast<double>(z.size()) * sum_sq);
}

double compute_reward(std::span<const double> throughputs_bps, std::span<const double> powers_mw,
                      const RewardWeights& weights) {
  if (throughputs_bps.empty() || powers_mw.empty()) {
    throw ContractViolation("compute_reward: empty input");
  }
  double sum_mbps = std::accumulate(throughputs_bps.begin(), throughputs_bps.end(), 0.0) / 1e6;
  double sum_w = std::accumulate(powers_mw.begin(), powers_mw.end(), 0.0) / 1e3;
  return weights.kappa * sum_mbps - weights.beta * sum_w + weights.phi * jain_fairness(throughputs_bps);
}

double interference_reference_mw(const ChannelParams& params) {
  return noise_power_mw(1e6, params.noise_density_dbm_per_hz);
}

StateVector build_state(std::span<const double> powers_mw, std::span<const double> interference_mw,
                        std::span<const std::size_t> serving,
                        std::span<const double> user_bands_hz, const NetworkTopology& topology,
                        double noise_ref_mw) {
  EnvLayout layout{topology.n_stations(), topology.n_users()};
  const auto nb = layout.n_stations;
  const auto nu = layout.n_users;
  if (powers_mw.size() != nb || interference_mw.size() != nu || serving.size() != nu ||
      user_bands_hz.size() != nu) {
    throw ContractViolation("build_state: component dimensions do not match topology");
  }
  StateVector s(layout.state_dim(), 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    s[layout.power_offset() + b] = clamp01(normalize_power(topology.stations[b], powers_mw[b]));
  }
  for (std::size_t u = 0; u < nu; ++u) {
    double i = std::max(interference_mw[u], 0.0);
    s[layout.interference_offset() + u] = i / (i + noise_ref_mw);
  }
  for (std::size_t u = 0; u < nu; ++u) {
    std::size_t b = serving[u];
    if (b >= nb) throw ContractViolation("build_state: serving index out of range");
    s[layout.allocation_offset() + b * nu + u] =
        clamp01(user_bands_hz[u] / topology.stations[b].band_total_hz);
  }
  const auto& bounds = topology.bounds;
  auto put_xy = [&](std::size_t offset, Vec2 p) {
    s[offset] = clamp01((p.x - bounds.xmin) / bounds.width());
    s[offset + 1] = clamp01((p.y - bounds.ymin) / bounds.height());
  };
  for (std::size_t b = 0; b < nb; ++b) put_xy(layout.station_xy_offset() + 2 * b, topology.stations[b].position);
  for (std::size_t u = 0; u < nu; ++u) put_xy(layout.user_xy_offset() + 2 * u, topology.users[u]);
  return s;
}

HetNetEnv::HetNetEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  layout_ = {config_.topology.n_stations(), config_.users()};
  topology_ = config_.topology;
  noise_ref_mw_ = interference_reference_mw(config_.channel);
}

StateVector HetNetEnv::reset(std::uint64_t seed) {
  topology_.users = sample_users(config_.topology, config_.user_layout, layout_.n_users, mix_seed(seed, 1));
  distances_ = link_distances(topology_);
  Rng episode_rng(mix_seed(seed, 2));
  shadowing_ = draw_link_shadowing(topology_, config_.channel, episode_rng);
  step_rng_ = Rng(mix_seed(seed, 3));

  observed_gains_.resize(distances_.rows(), distances_.cols());
  for (Eigen::Index b = 0; b < distances_.rows(); ++b) {
    for (Eigen::Index u = 0; u < distances_.cols(); ++u) {
      observed_gains_(b, u) = effective_gain(1.0, distances_(b, u),
                                             config_.channel.path_loss_exponent, shadowing_(b, u));
    }
  }

  const auto nb = layout_.n_stations;
  const auto nu = layout_.n_users;
  last_allocation_ = PhysicalAllocation{};
  last_allocation_.powers_mw.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) last_allocation_.powers_mw[b] = topology_.stations[b].p_min_mw;
  last_allocation_.power_norm.assign(nb, 0.0);
  last_allocation_.band_fractions.assign(nb, 0.0);
  last_allocation_.sched_scores.assign(nu, 0.0);
  last_allocation_.serving = associate_strongest(last_allocation_.powers_mw, observed_gains_, topology_);
  last_allocation_.user_bands_hz.assign(nu, 0.0);
  last_throughput_mbps_.assign(nu, 0.0);

  std::vector<double> no_interference(nu, 0.0);
  state_ = build_state(last_allocation_.powers_mw, no_interference, last_allocation_.serving,
                       last_allocation_.user_bands_hz, topology_, noise_ref_mw_);
  step_index_ = 0;
  done_ = false;
  started_ = true;
  ++episode_;
  return state_;
}

StepOutcome HetNetEnv::step(std::span<const double> raw_action) {
  if (!started_) throw ContractViolation("step called before reset");
  if (done_) throw ContractViolation("step called after the episode finished; reset first");
  if (raw_action.size() != layout_.action_dim()) {
    throw ContractViolation("step: expected " + std::to_string(layout_.action_dim()) + " action entries, got " +
                            std::to_string(raw_action.size()));
  }

  auto channel = realize_channel(distances_, shadowing_, config_.channel, step_rng_);
  auto alloc = decode_action(raw_action, topology_, channel.gains);

  const auto nb = layout_.n_stations;
  const auto nu = layout_.n_users;
  StepOutcome out;
  auto& info = out.info;
  info.per_user_throughput_bps.resize(nu);
  info.per_user_sinr.resize(nu);
  std::vector<double> interference(nu, 0.0);
  for (std::size_t u = 0; u < nu; ++u) {
    const auto ui = static_cast<Eigen::Index>(u);
    std::size_t serving = alloc.serving[u];
    for (std::size_t b = 0; b < nb; ++b) {
      if (b != serving) interference[u] += alloc.powers_mw[b] * channel.gains(static_cast<Eigen::Index>(b), ui);
    }
    double signal = alloc.powers_mw[serving] * channel.gains(static_cast<Eigen::Index>(serving), ui);
    double noise = noise_power_mw(alloc.user_bands_hz[u], config_.channel.noise_density_dbm_per_hz);
    double sinr = signal / (interference[u] + noise);
    info.per_user_sinr[u] = sinr;
    info.per_user_throughput_bps[u] = throughput(alloc.user_bands_hz[u], sinr);
  }

  out.reward = compute_reward(info.per_user_throughput_bps, alloc.powers_mw, config_.weights);
  info.total_power_mw = std::accumulate(alloc.powers_mw.begin(), alloc.powers_mw.end(), 0.0);
  info.fairness = jain_fairness(info.per_user_throughput_bps);
  info.sum_throughput_mbps =
      std::accumulate(info.per_user_throughput_bps.begin(), info.per_user_throughput_bps.end(), 0.0) / 1e6;
  double band = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    if (alloc.users_served_by(b) > 0) band += alloc.band_fractions[b];
  }
  info.mean_band_fraction = band / static_cast<double>(nb);
  info.mean_power_norm =
      std::accumulate(alloc.power_norm.begin(), alloc.power_norm.end(), 0.0) / static_cast<double>(nb);
  info.mean_sched_score =
      std::accumulate(alloc.sched_scores.begin(), alloc.sched_scores.end(), 0.0) / static_cast<double>(nu);

  state_ = build_state(alloc.powers_mw, interference, alloc.serving, alloc.user_bands_hz, topology_,
                       noise_ref_mw_);
  out.next_state = state_;
  observed_gains_ = channel.gains;
  for (std::size_t u = 0; u < nu; ++u) last_throughput_mbps_[u] = info.per_user_throughput_bps[u] / 1e6;
  last_allocation_ = std::move(alloc);

  ++step_index_;
  done_ = step_index_ >= config_.horizon;
  out.done = done_;

  if (trace_ != nullptr) {
    *trace_ << episode_ << ',' << step_index_ - 1 << ',' << out.reward << ',' << info.fairness << ','
            << info.total_power_mw << ',' << info.sum_throughput_mbps << '\n';
  }
  return out;
}

void HetNetEnv::set_trace(std::ostream* out) {
  trace_ = out;
  if (trace_ != nullptr) *trace_ << "episode,step,reward,fairness,total_power_mW,sum_throughput_Mbps\n";
}

}  // namespace hetnet
