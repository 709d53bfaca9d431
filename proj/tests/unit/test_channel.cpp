#include <doctest.h>

#include <cmath>
#include <vector>

#include "hetnet/channel.hpp"
#include "hetnet/errors.hpp"

using namespace hetnet;

namespace {

NetworkTopology corner_topology() {
  NetworkTopology t;
  t.bounds = {0, 0, 100, 100};
  t.stations.push_back({0, Tier::Macro, {0, 0}, 1000, 40000, 20e6});
  t.stations.push_back({1, Tier::Micro, {50, 50}, 100, 1000, 10e6});
  t.users = {{3, 4}, {50, 50.5}, {90, 10}};
  return t;
}

}  // namespace

TEST_SUITE("channel") {
  TEST_CASE("shadowing: zero sigma, dB conversion, zero mean in dB") {
    Rng rng = make_rng(1);
    for (int i = 0; i < 10; ++i) CHECK(draw_shadowing(rng, 0.0) == 1.0);
    CHECK(shadowing_from_db(10.0) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(shadowing_from_db(0.0) == 1.0);

    const int n = 100000;
    double sum_db = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      double psi = draw_shadowing(rng, 8.0);
      REQUIRE(psi > 0.0);
      double x = 10.0 * std::log10(psi);
      sum_db += x;
      sum_sq += x * x;
    }
    double mean = sum_db / n;
    CHECK(std::abs(mean) < 0.1);
    CHECK(std::sqrt(sum_sq / n - mean * mean) == doctest::Approx(8.0).epsilon(0.02));
  }

  TEST_CASE("effective gain evaluations") {
    for (double eta : {2.0, 3.5, 4.0}) CHECK(effective_gain(1.0, 1.0, eta, 1.0) == 1.0);
    CHECK(effective_gain(1.0, 10.0, 2.0, 1.0) == doctest::Approx(0.01).epsilon(1e-15));
    double h1 = effective_gain(0.7, 120.0, 3.5, 1.0);
    double h10 = effective_gain(0.7, 120.0, 3.5, 10.0);
    CHECK(h1 / h10 == doctest::Approx(10.0).epsilon(1e-14));
    // Distances under the floor are evaluated at the floor.
    CHECK(effective_gain(1.0, 0.0, 3.5, 1.0) == effective_gain(1.0, kMinLinkDistanceM, 3.5, 1.0));
    CHECK(effective_gain(1.0, 0.25, 3.5, 1.0) == 1.0);
  }

  TEST_CASE("SINR hand values") {
    const double noise = 1e-9;
    CHECK(compute_sinr(2e-9, 1.0, {}, {}, noise) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(compute_sinr(0.0, 0.3, {}, {}, noise) == 0.0);

    const double product = 5.0;
    std::vector<double> p{5.0};
    std::vector<double> g{1.0};
    double sinr = compute_sinr(product, 1.0, p, g, 1e-12 * product);
    CHECK(std::abs(sinr - 1.0) < 1e-6);

    std::vector<double> p3{1.0, 2.0, 4.0};
    std::vector<double> g3{0.5, 0.25, 0.125};
    CHECK(compute_sinr(3.0, 1.0, p3, g3, 0.5) == doctest::Approx(3.0 / 2.0).epsilon(1e-15));
  }

  TEST_CASE("SINR scale covariance") {
    Rng rng = make_rng(4);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
      double ps = u(rng), gs = u(rng), noise = u(rng);
      std::vector<double> pi{u(rng), u(rng), u(rng)};
      std::vector<double> gi{u(rng), u(rng), u(rng)};
      double c = u(rng);
      std::vector<double> pic{pi[0] * c, pi[1] * c, pi[2] * c};
      double a = compute_sinr(ps, gs, pi, gi, noise);
      double b = compute_sinr(ps * c, gs, pic, gi, noise * c);
      CHECK(b == doctest::Approx(a).epsilon(1e-12));
    }
  }

  TEST_CASE("SINR contract checks") {
    std::vector<double> p{1.0, 2.0};
    std::vector<double> g{1.0};
    CHECK_THROWS_AS(compute_sinr(1.0, 1.0, p, g, 1.0), ContractViolation);
    CHECK_THROWS_AS(compute_sinr(1.0, 1.0, {}, {}, 0.0), ContractViolation);
  }

  TEST_CASE("throughput values and monotonicity") {
    CHECK(throughput(1.0, 1.0) == 1.0);
    CHECK(throughput(1.0, 3.0) == 2.0);
    CHECK(throughput(0.0, 1234.0) == 0.0);
    double prev = 0.0;
    for (double sinr = 0.0; sinr < 100.0; sinr += 0.37) {
      double t = throughput(5e6, sinr);
      CHECK(t >= prev);
      prev = t;
    }
    CHECK(throughput(2e6, 7.0) >= throughput(1e6, 7.0));
  }

  TEST_CASE("thermal noise") {
    CHECK(dbm_to_mw(0.0) == 1.0);
    CHECK(dbm_to_mw(30.0) == doctest::Approx(1000.0).epsilon(1e-14));
    // -174 dBm/Hz over 1 MHz is -114 dBm.
    CHECK(noise_power_mw(1e6) == doctest::Approx(std::pow(10.0, -11.4)).epsilon(1e-12));
    CHECK(noise_power_mw(0.0) == noise_power_mw(1.0));
    CHECK(noise_power_mw(0.5) == noise_power_mw(1.0));
  }

  TEST_CASE("link distances use Euclidean geometry with the floor") {
    auto d = link_distances(corner_topology());
    CHECK(d(0, 0) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(d(1, 1) == kMinLinkDistanceM);
  }

  TEST_CASE("realizations: gain identity, positivity, determinism") {
    auto topo = corner_topology();
    ChannelParams params;
    Rng e1 = make_rng(5, 1), s1 = make_rng(5, 2);
    Rng e2 = make_rng(5, 1), s2 = make_rng(5, 2);
    auto a = sample_channel_state(topo, params, e1, s1);
    auto b = sample_channel_state(topo, params, e2, s2);
    CHECK(a.gains == b.gains);
    CHECK(a.fading == b.fading);
    CHECK(a.shadowing == b.shadowing);
    for (Eigen::Index i = 0; i < a.gains.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.gains.cols(); ++j) {
        CHECK(a.gains(i, j) > 0.0);
        CHECK(std::isfinite(a.gains(i, j)));
        CHECK(a.gains(i, j) ==
              a.fading(i, j) / (std::pow(a.distances(i, j), params.path_loss_exponent) * a.shadowing(i, j)));
      }
    }
  }

  TEST_CASE("fading is unit-mean exponential") {
    Rng rng = make_rng(11);
    const int draws = 100000;
    auto s = draw_link_fading(1, draws, rng);
    double mean = s.mean();
    CHECK(std::abs(mean - 1.0) < 0.02);
    double var = (s.array() - mean).square().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    CHECK(s.minCoeff() > 0.0);
  }

  TEST_CASE("shadowing is per episode, fading per step") {
    auto topo = corner_topology();
    ChannelParams params;
    Rng episode = make_rng(2, 1);
    Rng step = make_rng(2, 2);
    auto shadow = draw_link_shadowing(topo, params, episode);
    auto d = link_distances(topo);
    auto r1 = realize_channel(d, shadow, params, step);
    auto r2 = realize_channel(d, shadow, params, step);
    CHECK(r1.shadowing == r2.shadowing);
    CHECK_FALSE(r1.fading == r2.fading);
  }

  TEST_CASE("parameter validation") {
    ChannelParams p;
    CHECK_NOTHROW(p.validate());
    p.path_loss_exponent = 0.0;
    CHECK_THROWS(p.validate());
    p = {};
    p.shadowing_sigma_db = -1.0;
    CHECK_THROWS(p.validate());
  }
}
