#pragma once

#include <span>

#include <Eigen/Dense>

#include "hetnet/rng.hpp"
#include "hetnet/topology.hpp"

namespace hetnet {

struct ChannelParams {
  double path_loss_exponent = 3.5;
  double shadowing_sigma_db = 8.0;
  double noise_density_dbm_per_hz = -174.0;

  void validate() const;
};

// Links closer than this are evaluated at the floor distance.
inline constexpr double kMinLinkDistanceM = 1.0;

// One timestep of per-link channel state, [stations x users]. All entries are
// linear-scale and strictly positive; gains = fading / (distance^eta * shadowing).
struct ChannelRealization {
  Eigen::MatrixXd gains;
  Eigen::MatrixXd distances;
  Eigen::MatrixXd shadowing;
  Eigen::MatrixXd fading;
};

// Log-normal shadowing: X ~ N(0, sigma^2) dB, returns 10^(X/10).
double draw_shadowing(Rng& rng, double sigma_db);
double shadowing_from_db(double x_db);

double effective_gain(double fading, double distance_m, double eta, double shadowing);

double compute_sinr(double serving_power_mw, double serving_gain,
                    std::span<const double> interferer_powers_mw,
                    std::span<const double> interferer_gains, double noise_mw);

// Shannon rate in bit/s.
double throughput(double band_hz, double sinr);

// Thermal noise over a band, mW. Bands under 1 Hz are evaluated at 1 Hz.
double noise_power_mw(double band_hz, double density_dbm_per_hz = -174.0);

double dbm_to_mw(double dbm);

Eigen::MatrixXd link_distances(const NetworkTopology& topology);
Eigen::MatrixXd draw_link_shadowing(const NetworkTopology& topology, const ChannelParams& params,
                                    Rng& episode_rng);
Eigen::MatrixXd draw_link_fading(Eigen::Index n_stations, Eigen::Index n_users, Rng& step_rng);

// Assembles gains from precomputed distances/shadowing and fresh fading.
ChannelRealization realize_channel(const Eigen::MatrixXd& distances,
                                   const Eigen::MatrixXd& shadowing, const ChannelParams& params,
                                   Rng& step_rng);

// Draws shadowing from episode_rng and fading from step_rng in one go.
ChannelRealization sample_channel_state(const NetworkTopology& topology,
                                        const ChannelParams& params, Rng& episode_rng,
                                        Rng& step_rng);

}  // namespace hetnet
