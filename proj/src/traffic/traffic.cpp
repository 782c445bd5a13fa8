#include "crshare/traffic.h"

#include <algorithm>

#include "crshare/linalg.h"
#include "crshare/rng.h"

namespace crshare::traffic {

TrafficModel TrafficModel::from_config(const ScenarioConfig& config) {
  TrafficModel m;
  m.mean_rates = config.aggregate_mean_rates();
  m.rate_stddevs = config.aggregate_rate_stddevs();
  m.correlation = config.rate_correlation;
  m.mean_holding_time = config.mean_holding_time;
  return m;
}

CorrelatedRateSampler::CorrelatedRateSampler(const TrafficModel& model) : mean_(model.mean_rates) {
  const std::size_t n = mean_.size();
  if (model.rate_stddevs.size() != n || model.correlation.size() != n) {
    throw ConfigError("rate_stddevs", "traffic model dimensions disagree");
  }
  for (double s : model.rate_stddevs) {
    if (s < 0.0) throw ConfigError("rate_stddevs", "standard deviations must be >= 0");
  }
  Matrix cov(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (model.correlation[i].size() != n) throw ConfigError("rate_correlation", "matrix must be square");
    for (std::size_t j = 0; j < n; ++j) {
      cov[i][j] = model.rate_stddevs[i] * model.correlation[i][j] * model.rate_stddevs[j];
    }
  }
  if (!psd_factor(model.correlation)) {
    throw ConfigError("rate_correlation", "matrix is not positive semi-definite");
  }
  auto factor = psd_factor(cov);
  if (!factor) throw ConfigError("rate_correlation", "covariance is not positive semi-definite");
  factor_ = std::move(*factor);
}

std::vector<double> CorrelatedRateSampler::draw(std::mt19937_64& rng) const {
  const std::size_t n = mean_.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(n);
  for (auto& v : z) v = normal(rng);

  std::vector<double> out(mean_);
  for (std::size_t i = 0; i < n; ++i) {
    double shift = 0.0;
    for (std::size_t j = 0; j < n; ++j) shift += factor_[i][j] * z[j];
    out[i] = std::max(0.0, out[i] + shift);
  }
  return out;
}

std::vector<double> draw_correlated_rates(const TrafficModel& model, std::uint64_t seed) {
  auto rng = make_stream(seed, StreamPurpose::kRates);
  return CorrelatedRateSampler(model).draw(rng);
}

ArrivalSchedule generate_arrivals(std::span<const double> rates, double mean_holding_time, double horizon,
                                  std::uint64_t seed) {
  ArrivalSchedule schedule;
  schedule.per_provider.resize(rates.size());
  for (std::size_t p = 0; p < rates.size(); ++p) {
    const double rate = rates[p];
    if (!(rate > 0.0)) continue;
    auto arrivals = make_stream(seed, StreamPurpose::kArrivals, static_cast<std::uint32_t>(p));
    auto holding = make_stream(seed, StreamPurpose::kHolding, static_cast<std::uint32_t>(p));
    std::exponential_distribution<double> gap(rate);
    std::exponential_distribution<double> hold(1.0 / mean_holding_time);

    auto& list = schedule.per_provider[p];
    double t = 0.0;
    while (true) {
      const double next = t + gap(arrivals);
      if (next > horizon) break;
      if (next <= t) continue;  // zero gap; keep times strictly increasing
      double h = hold(holding);
      while (h <= 0.0) h = hold(holding);
      list.push_back({next, h});
      t = next;
    }
  }
  return schedule;
}

}  // namespace crshare::traffic
