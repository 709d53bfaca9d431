#include "hetnet/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hetnet/errors.hpp"

namespace hetnet {

void ChannelParams::validate() const {
  if (!(path_loss_exponent > 0.0)) throw std::invalid_argument("path_loss_exponent must be > 0");
  if (!(shadowing_sigma_db >= 0.0)) throw std::invalid_argument("shadowing_sigma_db must be >= 0");
  if (!std::isfinite(noise_density_dbm_per_hz)) {
    throw std::invalid_argument("noise_density_dbm_per_hz must be finite");
  }
}

double shadowing_from_db(double x_db) { return std::pow(10.0, x_db / 10.0); }

double draw_shadowing(Rng& rng, double sigma_db) {
  if (sigma_db == 0.0) return 1.0;
  std::normal_distribution<double> x(0.0, sigma_db);
  return shadowing_from_db(x(rng));
}

double effective_gain(double fading, double distance_m, double eta, double shadowing) {
  double d = std::max(distance_m, kMinLinkDistanceM);
  return fading / (std::pow(d, eta) * shadowing);
}

double compute_sinr(double serving_power_mw, double serving_gain,
                    std::span<const double> interferer_powers_mw,
                    std::span<const double> interferer_gains, double noise_mw) {
  if (interferer_powers_mw.size() != interferer_gains.size()) {
    throw ContractViolation("compute_sinr: interferer lists differ in length");
  }
  if (!(noise_mw > 0.0)) throw ContractViolation("compute_sinr: noise must be > 0");
  double interference = 0.0;
  for (std::size_t k = 0; k < interferer_gains.size(); ++k) {
    interference += interferer_powers_mw[k] * interferer_gains[k];
  }
  return serving_power_mw * serving_gain / (interference + noise_mw);
}

double throughput(double band_hz, double sinr) { return band_hz * std::log2(1.0 + sinr); }

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double noise_power_mw(double band_hz, double density_dbm_per_hz) {
  return dbm_to_mw(density_dbm_per_hz + 10.0 * std::log10(std::max(band_hz, 1.0)));
}

Eigen::MatrixXd link_distances(const NetworkTopology& topology) {
  auto nb = static_cast<Eigen::Index>(topology.n_stations());
  auto nu = static_cast<Eigen::Index>(topology.n_users());
  Eigen::MatrixXd d(nb, nu);
  for (Eigen::Index b = 0; b < nb; ++b) {
    for (Eigen::Index u = 0; u < nu; ++u) {
      d(b, u) = std::max(distance(topology.stations[b].position, topology.users[u]),
                         kMinLinkDistanceM);
    }
  }
  return d;
}

Eigen::MatrixXd draw_link_shadowing(const NetworkTopology& topology, const ChannelParams& params,
                                    Rng& episode_rng) {
  auto nb = static_cast<Eigen::Index>(topology.n_stations());
  auto nu = static_cast<Eigen::Index>(topology.n_users());
  Eigen::MatrixXd psi(nb, nu);
  for (Eigen::Index b = 0; b < nb; ++b) {
    for (Eigen::Index u = 0; u < nu; ++u) psi(b, u) = draw_shadowing(episode_rng, params.shadowing_sigma_db);
  }
  return psi;
}

Eigen::MatrixXd draw_link_fading(Eigen::Index n_stations, Eigen::Index n_users, Rng& step_rng) {
  std::exponential_distribution<double> rayleigh_power(1.0);
  Eigen::MatrixXd s(n_stations, n_users);
  for (Eigen::Index b = 0; b < n_stations; ++b) {
    for (Eigen::Index u = 0; u < n_users; ++u) {
      // exponential_distribution may return 0; the realization must stay positive.
      s(b, u) = std::max(rayleigh_power(step_rng), 1e-300);
    }
  }
  return s;
}

ChannelRealization realize_channel(const Eigen::MatrixXd& distances,
                                   const Eigen::MatrixXd& shadowing, const ChannelParams& params,
                                   Rng& step_rng) {
  ChannelRealization ch;
  ch.distances = distances;
  ch.shadowing = shadowing;
  ch.fading = draw_link_fading(distances.rows(), distances.cols(), step_rng);
  ch.gains.resize(distances.rows(), distances.cols());
  for (Eigen::Index b = 0; b < distances.rows(); ++b) {
    for (Eigen::Index u = 0; u < distances.cols(); ++u) {
      ch.gains(b, u) = effective_gain(ch.fading(b, u), distances(b, u), params.path_loss_exponent,
                                      shadowing(b, u));
    }
  }
  return ch;
}

ChannelRealization sample_channel_state(const NetworkTopology& topology,
                                        const ChannelParams& params, Rng& episode_rng,
                                        Rng& step_rng) {
  auto shadowing = draw_link_shadowing(topology, params, episode_rng);
  return realize_channel(link_distances(topology), shadowing, params, step_rng);
}

}  // namespace hetnet
