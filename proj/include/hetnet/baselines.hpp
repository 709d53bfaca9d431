#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/env.hpp"
#include "hetnet/topology.hpp"

namespace hetnet {

inline constexpr double kGOfdmaPowerLevel = 0.98;
inline constexpr double kIpPcPowerFloor = 0.01;
inline constexpr double kIpPcPowerCap = 0.3;
inline constexpr double kIpPcBandFraction = 0.25;
inline constexpr double kPfEqPowerLevel = 0.3;
inline constexpr double kPfRateFloor = 1e-6;

// Proportional-fair scheduler memory: EWMA of served rate per user, Mbit/s.
struct PfState {
  std::vector<double> avg_rate;
  double ewma_factor = 0.99;

  static PfState initial(std::size_t n_users, double ewma_factor = 0.99);
};

// Throughput-first: near-full power, full band, whole band to each cell's best link.
ActionVector g_ofdma_policy(const Eigen::MatrixXd& gains, const NetworkTopology& topology);

// Power-first: interference leakage priced per station, conservative band.
ActionVector ip_pc_policy(const Eigen::MatrixXd& gains, const NetworkTopology& topology);

// Fairness-first: moderate power, full band split near-evenly with a PF tilt.
std::pair<ActionVector, PfState> pf_eq_policy(const Eigen::MatrixXd& gains,
                                              std::span<const double> last_throughputs_mbps,
                                              PfState pf, const NetworkTopology& topology,
                                              const ChannelParams& channel = {});

// Leakage price per station: sum of gains towards users it does not serve.
std::vector<double> interference_prices(const Eigen::MatrixXd& gains, const NetworkTopology& topology);

}  // namespace hetnet
