#pragma once

#include "hetnet/env.hpp"
#include "hetnet/topology.hpp"

namespace hetnet::testing {

// One macro cell with two users; small enough for many training runs.
inline EnvConfig tiny_env(int horizon = 10) {
  EnvConfig c;
  auto d = default_tier_limits(Tier::Macro);
  c.topology.bounds = {0, 0, 1000, 1000};
  c.topology.stations.push_back({0, Tier::Macro, {500, 500}, d.p_min_mw, d.p_max_mw, d.band_hz});
  c.topology.users = {{300, 500}, {800, 650}};
  c.user_layout = UserLayout::Fixed;
  c.horizon = horizon;
  return c;
}

}  // namespace hetnet::testing
