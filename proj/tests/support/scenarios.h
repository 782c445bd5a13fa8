#pragma once

// Hand-rolled generators for small randomized scenarios.

#include <algorithm>
#include <random>

#include "crshare/config.h"

namespace crshare::testing {

// A small scenario with an explicit arrival schedule of at most `max_calls`
// calls. Capacities are tight so blocking, borrowing and release all occur.
inline ScenarioConfig micro_scenario(std::uint64_t seed, int max_calls = 50) {
  std::mt19937_64 rng(seed * 7919 + 17);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  ScenarioConfig c;
  c.n_providers = uniform_int(1, 4);
  c.channels_per_provider = uniform_int(1, 2);
  c.capacity_users_per_channel = uniform_int(1, 3);
  c.grid_dims = {1, uniform_int(1, 2)};
  c.horizon_t = 100.0;
  c.sensing_period = 1.0 + uniform_int(0, 4);
  c.max_hops = uniform_int(0, 2);
  c.sharing_enabled = uniform_int(0, 3) != 0;
  c.seed = seed;
  apply_defaults(c);

  const int total = uniform_int(1, max_calls);
  ArrivalSchedule s;
  s.per_provider.resize(static_cast<std::size_t>(c.n_providers));
  std::uniform_real_distribution<double> when(0.0, c.horizon_t);
  std::exponential_distribution<double> hold(1.0 / 30.0);
  std::vector<std::vector<double>> times(s.per_provider.size());
  for (int k = 0; k < total; ++k) times[static_cast<std::size_t>(uniform_int(0, c.n_providers - 1))].push_back(when(rng));
  for (std::size_t p = 0; p < times.size(); ++p) {
    std::sort(times[p].begin(), times[p].end());
    times[p].erase(std::unique(times[p].begin(), times[p].end()), times[p].end());
    for (double t : times[p]) s.per_provider[p].push_back({t, hold(rng) + 1e-3});
  }
  c.arrival_schedule = s;
  return c;
}

}  // namespace crshare::testing
