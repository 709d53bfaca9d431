#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/channel.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/topology.hpp"

namespace hetnet {

using StateVector = std::vector<double>;
using ActionVector = std::vector<double>;

struct RewardWeights {
  double kappa = 1.0;  // per Mbit/s of sum throughput
  double beta = 0.01;  // per W of total transmit power
  double phi = 0.96;   // per unit of Jain fairness
};

struct EnvConfig {
  NetworkTopology topology;  // stations and bounds; users are only read for UserLayout::Fixed
  std::size_t n_users = 0;   // 0 means topology.users.size()
  UserLayout user_layout = UserLayout::Uniform;
  ChannelParams channel;
  int horizon = 200;
  RewardWeights weights;
  double gamma = 0.99;

  std::size_t users() const { return n_users != 0 ? n_users : topology.n_users(); }
  void validate() const;
};

// Flat vector layouts.
//   state:  [power (B) | interference (U) | allocation B x U row-major | BS xy (2B) | user xy (2U)]
//   action: [p_adj (B) | w_alloc (B) | s_score (U)]
struct EnvLayout {
  std::size_t n_stations = 0;
  std::size_t n_users = 0;

  std::size_t state_dim() const {
    return n_stations + n_users + n_stations * n_users + 2 * n_stations + 2 * n_users;
  }
  std::size_t action_dim() const { return 2 * n_stations + n_users; }

  std::size_t power_offset() const { return 0; }
  std::size_t interference_offset() const { return n_stations; }
  std::size_t allocation_offset() const { return n_stations + n_users; }
  std::size_t station_xy_offset() const { return allocation_offset() + n_stations * n_users; }
  std::size_t user_xy_offset() const { return station_xy_offset() + 2 * n_stations; }

  std::size_t p_adj_offset() const { return 0; }
  std::size_t w_alloc_offset() const { return n_stations; }
  std::size_t score_offset() const { return 2 * n_stations; }
};

inline constexpr double kScoreEpsilon = 1e-6;

struct PhysicalAllocation {
  std::vector<double> powers_mw;
  std::vector<double> power_norm;      // clamped p_adj
  std::vector<double> band_fractions;  // clamped w_alloc
  std::vector<double> sched_scores;    // clamped s_score
  std::vector<std::size_t> serving;    // serving station index per user
  std::vector<double> user_bands_hz;

  Eigen::MatrixXi association() const;
  std::size_t users_served_by(std::size_t station) const;
};

// Entries outside [0, 1] (and NaN) are clamped before mapping.
PhysicalAllocation decode_action(std::span<const double> raw, const NetworkTopology& topology,
                                 const Eigen::MatrixXd& gains);

// argmax_b powers[b] * gains(b, u); ties resolve to the lowest station id.
std::vector<std::size_t> associate_strongest(std::span<const double> powers_mw,
                                             const Eigen::MatrixXd& gains,
                                             const NetworkTopology& topology);

double jain_fairness(std::span<const double> z);

double compute_reward(std::span<const double> throughputs_bps, std::span<const double> powers_mw,
                      const RewardWeights& weights);

// Thermal noise over 1 MHz, used to squash interference into [0, 1).
double interference_reference_mw(const ChannelParams& params);

StateVector build_state(std::span<const double> powers_mw, std::span<const double> interference_mw,
                        std::span<const std::size_t> serving,
                        std::span<const double> user_bands_hz, const NetworkTopology& topology,
                        double noise_ref_mw);

struct StepInfo {
  std::vector<double> per_user_throughput_bps;
  std::vector<double> per_user_sinr;
  double total_power_mw = 0.0;
  double fairness = 0.0;
  double mean_band_fraction = 0.0;  // band handed to users, averaged over stations
  double mean_power_norm = 0.0;
  double mean_sched_score = 0.0;
  double sum_throughput_mbps = 0.0;
};

struct StepOutcome {
  StateVector next_state;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Single-caller MDP state machine. reset() seeds every random stream of the
// episode (user placement, shadowing, per-step fading).
class HetNetEnv {
 public:
  explicit HetNetEnv(EnvConfig config);

  StateVector reset(std::uint64_t seed);
  StepOutcome step(std::span<const double> raw_action);

  const EnvConfig& config() const { return config_; }
  const EnvLayout& layout() const { return layout_; }
  std::size_t state_dim() const { return layout_.state_dim(); }
  std::size_t action_dim() const { return layout_.action_dim(); }
  int horizon() const { return config_.horizon; }
  int step_index() const { return step_index_; }
  bool done() const { return done_; }
  bool started() const { return started_; }

  // Users of the current episode.
  const NetworkTopology& topology() const { return topology_; }
  const StateVector& state() const { return state_; }
  // Gains the controller can observe: the last realized channel, or the
  // fading-free gains right after reset.
  const Eigen::MatrixXd& observed_gains() const { return observed_gains_; }
  const std::vector<double>& last_throughput_mbps() const { return last_throughput_mbps_; }
  const PhysicalAllocation& last_allocation() const { return last_allocation_; }

  // CSV rows: episode,step,reward,fairness,total_power_mW,sum_throughput_Mbps
  void set_trace(std::ostream* out);

 private:
  EnvConfig config_;
  EnvLayout layout_;
  NetworkTopology topology_;
  Eigen::MatrixXd distances_;
  Eigen::MatrixXd shadowing_;
  Eigen::MatrixXd observed_gains_;
  Rng step_rng_;
  StateVector state_;
  PhysicalAllocation last_allocation_;
  std::vector<double> last_throughput_mbps_;
  double noise_ref_mw_ = 0.0;
  int step_index_ = 0;
  bool done_ = false;
  bool started_ = false;
  long episode_ = -1;
  std::ostream* trace_ = nullptr;
};

}  // namespace hetnet
