#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "crshare/config.h"

namespace crshare::traffic {

struct TrafficModel {
  std::vector<double> mean_rates;    // calls/s per provider
  std::vector<double> rate_stddevs;  // calls/s per provider
  Matrix correlation;
  double mean_holding_time = 120.0;

  static TrafficModel from_config(const ScenarioConfig& config);
};

// Draws mean + F z with F F^T = diag(sigma) R diag(sigma), clamped at zero.
// The factorization is done once; draws are cheap.
class CorrelatedRateSampler {
 public:
  // Throws ConfigError when the covariance is not positive semi-definite.
  explicit CorrelatedRateSampler(const TrafficModel& model);

  std::vector<double> draw(std::mt19937_64& rng) const;

 private:
  std::vector<double> mean_;
  Matrix factor_;
};

// One realized rate vector per seed, from the dedicated rates stream.
std::vector<double> draw_correlated_rates(const TrafficModel& model, std::uint64_t seed);

// Homogeneous Poisson arrivals per provider on [0, horizon] with i.i.d.
// exponential holding times. Each provider uses its own arrival and holding
// streams.
ArrivalSchedule generate_arrivals(std::span<const double> rates, double mean_holding_time, double horizon,
                                  std::uint64_t seed);

}  // namespace crshare::traffic
