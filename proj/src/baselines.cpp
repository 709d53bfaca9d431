#include "hetnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetnet/errors.hpp"

namespace hetnet {
namespace {

void check_dims(const Eigen::MatrixXd& gains, const NetworkTopology& topology, const char* who) {
  if (static_cast<std::size_t>(gains.rows()) != topology.n_stations() ||
      static_cast<std::size_t>(gains.cols()) != topology.n_users()) {
    throw ContractViolation(std::string(who) + ": gain matrix does not match topology");
  }
}

std::vector<double> decoded_powers(const NetworkTopology& topology, double level) {
  std::vector<double> p(topology.n_stations());
  for (std::size_t b = 0; b < p.size(); ++b) {
    const auto& bs = topology.stations[b];
    p[b] = bs.p_min_mw + level * (bs.p_max_mw - bs.p_min_mw);
  }
  return p;
}

std::vector<double> max_powers(const NetworkTopology& topology) {
  std::vector<double> p(topology.n_stations());
  for (std::size_t b = 0; b < p.size(); ++b) p[b] = topology.stations[b].p_max_mw;
  return p;
}

}  // namespace

PfState PfState::initial(std::size_t n_users, double ewma_factor) {
  return {std::vector<double>(n_users, kPfRateFloor), ewma_factor};
}

ActionVector g_ofdma_policy(const Eigen::MatrixXd& gains, const NetworkTopology& topology) {
  check_dims(gains, topology, "g_ofdma_policy");
  EnvLayout layout{topology.n_stations(), topology.n_users()};
  ActionVector a(layout.action_dim(), 0.0);
  for (std::size_t b = 0; b < layout.n_stations; ++b) {
    a[layout.p_adj_offset() + b] = kGOfdmaPowerLevel;
    a[layout.w_alloc_offset() + b] = 1.0;
  }
  auto powers = decoded_powers(topology, kGOfdmaPowerLevel);
  auto serving = associate_strongest(powers, gains, topology);
  std::vector<long> best(layout.n_stations, -1);
  for (std::size_t u = 0; u < layout.n_users; ++u) {
    auto b = serving[u];
    auto bi = static_cast<Eigen::Index>(b);
    if (best[b] < 0 || gains(bi, static_cast<Eigen::Index>(u)) > gains(bi, best[b])) {
      best[b] = static_cast<long>(u);
    }
  }
  for (long u : best) {
    if (u >= 0) a[layout.score_offset() + static_cast<std::size_t>(u)] = 1.0;
  }
  return a;
}

std::vector<double> interference_prices(const Eigen::MatrixXd& gains, const NetworkTopology& topology) {
  check_dims(gains, topology, "interference_prices");
  auto serving = associate_strongest(max_powers(topology), gains, topology);
  std::vector<double> price(topology.n_stations(), 0.0);
  for (std::size_t b = 0; b < price.size(); ++b) {
    for (std::size_t u = 0; u < serving.size(); ++u) {
      if (serving[u] != b) price[b] += gains(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(u));
    }
  }
  return price;
}

ActionVector ip_pc_policy(const Eigen::MatrixXd& gains, const NetworkTopology& topology) {
  auto price = interference_prices(gains, topology);
  EnvLayout layout{topology.n_stations(), topology.n_users()};
  double mean_price = std::accumulate(price.begin(), price.end(), 0.0) / static_cast<double>(price.size());

  ActionVector a(layout.action_dim(), 0.0);
  for (std::size_t b = 0; b < layout.n_stations; ++b) {
    double response = mean_price > 0.0 ? std::exp(-price[b] / mean_price) : 1.0;
    a[layout.p_adj_offset() + b] = std::clamp(response, kIpPcPowerFloor, kIpPcPowerCap);
    a[layout.w_alloc_offset() + b] = kIpPcBandFraction;
  }
  for (std::size_t u = 0; u < layout.n_users; ++u) {
    a[layout.score_offset() + u] = 1.0 / static_cast<double>(layout.n_users);
  }
  return a;
}

std::pair<ActionVector, PfState> pf_eq_policy(const Eigen::MatrixXd& gains,
                                              std::span<const double> last_throughputs_mbps,
                                              PfState pf, const NetworkTopology& topology,
                                              const ChannelParams& channel) {
  check_dims(gains, topology, "pf_eq_policy");
  EnvLayout layout{topology.n_stations(), topology.n_users()};
  const auto nb = layout.n_stations;
  const auto nu = layout.n_users;
  if (last_throughputs_mbps.size() != nu || pf.avg_rate.size() != nu) {
    throw ContractViolation("pf_eq_policy: per-user vectors do not match topology");
  }

  for (std::size_t u = 0; u < nu; ++u) {
    double updated = pf.ewma_factor * pf.avg_rate[u] + (1.0 - pf.ewma_factor) * last_throughputs_mbps[u];
    pf.avg_rate[u] = std::max(updated, kPfRateFloor);
  }

  auto powers = decoded_powers(topology, kPfEqPowerLevel);
  auto serving = associate_strongest(powers, gains, topology);
  double noise_ref = interference_reference_mw(channel);

  std::vector<double> priority(nu);
  std::vector<double> cell_sum(nb, 0.0);
  std::vector<std::size_t> cell_size(nb, 0);
  for (std::size_t u = 0; u < nu; ++u) {
    auto b = serving[u];
    double snr = powers[b] * gains(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(u)) / noise_ref;
    priority[u] = std::log2(1.0 + snr) / pf.avg_rate[u];
    cell_sum[b] += priority[u];
    ++cell_size[b];
  }

  ActionVector a(layout.action_dim(), 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    a[layout.p_adj_offset() + b] = kPfEqPowerLevel;
    a[layout.w_alloc_offset() + b] = 1.0;
  }
  for (std::size_t u = 0; u < nu; ++u) {
    auto b = serving[u];
    double uniform = 1.0 / static_cast<double>(cell_size[b]);
    double pf_share = cell_sum[b] > 0.0 ? priority[u] / cell_sum[b] : uniform;
    a[layout.score_offset() + u] = 0.5 * pf_share + 0.5 * uniform;
  }
  return {std::move(a), std::move(pf)};
}

}  // namespace hetnet
