#include "crshare/metrics.h"

#include <algorithm>
#include <limits>

namespace crshare::metrics {

ProviderMetrics& ProviderMetrics::operator+=(const ProviderMetrics& o) {
  blocked_calls += o.blocked_calls;
  processed_calls += o.processed_calls;
  accepted_calls += o.accepted_calls;
  offered_holding += o.offered_holding;
  accepted_holding += o.accepted_holding;
  revenue += o.revenue;
  busy_channel_integral += o.busy_channel_integral;
  owned_channels += o.owned_channels;
  interference_peak_mhz = std::max(interference_peak_mhz, o.interference_peak_mhz);
  interference_integral += o.interference_integral;
  return *this;
}

Flagged blocking_rate(std::span<const ProviderMetrics> providers) {
  std::uint64_t blocked = 0;
  std::uint64_t processed = 0;
  for (const auto& p : providers) {
    blocked += p.blocked_calls;
    processed += p.processed_calls;
  }
  if (processed == 0) return {0.0, true};
  return {static_cast<double>(blocked) / static_cast<double>(processed), false};
}

Flagged blocking_rate(const ProviderMetrics& provider) { return blocking_rate(std::span(&provider, 1)); }

Flagged system_efficiency(const ProviderMetrics& pm) {
  if (pm.offered_holding <= 0.0) return {1.0, true};
  // Accepted and offered sums may be accumulated in different orders; with
  // nothing blocked they cover the same calls.
  if (pm.blocked_calls == 0 && pm.accepted_calls == pm.processed_calls) return {1.0, false};
  // The horizon cancels: E_p / E_in = accepted holding / offered holding.
  return {pm.accepted_holding / pm.offered_holding, false};
}

double spectrum_efficiency(double busy_channel_integral, double owned_channels, double horizon) {
  if (owned_channels <= 0.0) throw ConfigError("channels_per_provider", "no channels owned");
  if (horizon <= 0.0) throw ConfigError("horizon_t", "must be > 0");
  return busy_channel_integral / (owned_channels * horizon);
}

double spectrum_efficiency(const ProviderMetrics& pm, double horizon) {
  return spectrum_efficiency(pm.busy_channel_integral, static_cast<double>(pm.owned_channels), horizon);
}

double cost_efficiency(double alpha, double horizon, double eta) { return alpha * horizon * eta; }

Flagged interference(std::span<const double> frequencies_mhz) {
  if (frequencies_mhz.empty()) return {0.0, true};
  const auto [lo, hi] = std::minmax_element(frequencies_mhz.begin(), frequencies_mhz.end());
  return {*hi - *lo, false};
}

Flagged interference(std::span<const Channel> channels_in_use) {
  std::vector<double> f;
  f.reserve(channels_in_use.size());
  for (const auto& c : channels_in_use) f.push_back(c.center_frequency_mhz);
  return interference(f);
}

MetricsAccumulator::MetricsAccumulator(std::span<const Channel> channels, std::size_t n_providers,
                                       std::size_t n_cells, double horizon)
    : channels_(channels),
      n_providers_(n_providers),
      n_cells_(n_cells),
      horizon_(horizon),
      providers_(n_providers),
      users_(channels.size() * n_cells),
      busy_by_owner_(n_providers, 0),
      cell_spread_(n_cells, 0.0),
      provider_cell_spread_(n_cells * n_providers, 0.0) {
  for (const auto& c : channels) providers_[c.owner.index()].owned_channels += n_cells;
}

void MetricsAccumulator::record_offered(ProviderId provider, double holding) {
  providers_[provider.index()].offered_holding += holding;
}

void MetricsAccumulator::record_accepted(ProviderId provider, double holding, double alpha) {
  auto& pm = providers_[provider.index()];
  ++pm.processed_calls;
  ++pm.accepted_calls;
  pm.accepted_holding += holding;
  pm.revenue += alpha * holding;
}

void MetricsAccumulator::record_blocked(ProviderId provider) {
  auto& pm = providers_[provider.index()];
  ++pm.processed_calls;
  ++pm.blocked_calls;
}

void MetricsAccumulator::advance(double now) {
  const double until = std::min(now, horizon_);
  if (until <= last_update_) return;
  const double dt = until - last_update_;
  for (std::size_t p = 0; p < n_providers_; ++p) {
    providers_[p].busy_channel_integral += static_cast<double>(busy_by_owner_[p]) * dt;
  }
  for (std::size_t cell = 0; cell < n_cells_; ++cell) {
    agg_integral_ += cell_spread_[cell] * dt;
    for (std::size_t p = 0; p < n_providers_; ++p) {
      providers_[p].interference_integral += provider_cell_spread_[cell * n_providers_ + p] * dt;
    }
  }
  last_update_ = until;
}

void MetricsAccumulator::refresh_cell_spread(CellId cell) {
  const std::size_t n_ch = channels_.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double lo = kInf, hi = -kInf;
  std::vector<double> p_lo(n_providers_, kInf), p_hi(n_providers_, -kInf);
  for (std::size_t c = 0; c < n_ch; ++c) {
    const auto& user = users_[cell.index() * n_ch + c];
    if (!user) continue;
    const double f = channels_[c].center_frequency_mhz;
    lo = std::min(lo, f);
    hi = std::max(hi, f);
    p_lo[user->index()] = std::min(p_lo[user->index()], f);
    p_hi[user->index()] = std::max(p_hi[user->index()], f);
  }
  cell_spread_[cell.index()] = hi >= lo ? hi - lo : 0.0;
  agg_peak_ = std::max(agg_peak_, cell_spread_[cell.index()]);
  for (std::size_t p = 0; p < n_providers_; ++p) {
    const double spread = p_hi[p] >= p_lo[p] ? p_hi[p] - p_lo[p] : 0.0;
    provider_cell_spread_[cell.index() * n_providers_ + p] = spread;
    providers_[p].interference_peak_mhz = std::max(providers_[p].interference_peak_mhz, spread);
  }
}

void MetricsAccumulator::set_channel_user(double now, CellId cell, ChannelId channel,
                                          std::optional<ProviderId> user) {
  auto& slot = users_[cell.index() * channels_.size() + channel.index()];
  if (slot == user) return;
  advance(now);
  const std::size_t owner = channels_[channel.index()].owner.index();
  if (slot && !user) --busy_by_owner_[owner];
  if (!slot && user) ++busy_by_owner_[owner];
  slot = user;
  // Changes past the horizon are outside the observation window.
  if (now <= horizon_) refresh_cell_spread(cell);
}

void MetricsAccumulator::finish() { advance(horizon_); }

MetricReport build_report(const MetricsAccumulator& acc, std::span<const double> unit_prices,
                          CostEfficiencyMode mode) {
  const double t = acc.horizon();
  const double cells = static_cast<double>(acc.n_cells());
  MetricReport report;
  report.horizon_t = t;
  report.cost_efficiency_mode = mode;

  ProviderMetrics total;
  double weighted_c_e = 0.0, weighted_c_e_spectrum = 0.0, plain_c_e = 0.0, plain_c_e_spectrum = 0.0;
  const auto& providers = acc.providers();
  for (std::size_t i = 0; i < providers.size(); ++i) {
    const auto& pm = providers[i];
    ProviderReport r;
    r.provider = static_cast<int>(i) + 1;
    r.processed_calls = pm.processed_calls;
    r.accepted_calls = pm.accepted_calls;
    r.blocked_calls = pm.blocked_calls;
    r.R_BL = blocking_rate(pm).value;
    const auto sys = system_efficiency(pm);
    r.eta_sys = sys.value;
    r.no_traffic = sys.flag && pm.processed_calls == 0;
    r.eta_s = spectrum_efficiency(pm, t);
    r.c_e_spectrum = cost_efficiency(unit_prices[i], t, r.eta_s);
    const double c_e_system = cost_efficiency(unit_prices[i], t, r.eta_sys);
    r.c_e = mode == CostEfficiencyMode::kSystem ? c_e_system : r.c_e_spectrum;
    r.offered_erlang = pm.offered_intensity(t);
    r.carried_erlang = pm.processed_intensity(t);
    r.c_e_ratio = r.offered_erlang > 0.0 ? pm.revenue / r.offered_erlang : 0.0;
    r.interference_mhz = pm.interference_peak_mhz;
    r.interference_mean_mhz = pm.interference_integral / (t * cells);
    r.revenue = pm.revenue;
    r.busy_channel_seconds = pm.busy_channel_integral;
    r.owned_channels = pm.owned_channels;

    weighted_c_e += r.c_e * r.offered_erlang;
    weighted_c_e_spectrum += r.c_e_spectrum * r.offered_erlang;
    plain_c_e += r.c_e;
    plain_c_e_spectrum += r.c_e_spectrum;
    total += pm;
    report.providers.push_back(r);
  }

  ProviderReport& agg = report.aggregate;
  agg.provider = 0;
  agg.processed_calls = total.processed_calls;
  agg.accepted_calls = total.accepted_calls;
  agg.blocked_calls = total.blocked_calls;
  agg.R_BL = blocking_rate(providers).value;
  const auto sys = system_efficiency(total);
  agg.eta_sys = sys.value;
  agg.no_traffic = sys.flag && total.processed_calls == 0;
  agg.eta_s = spectrum_efficiency(total, t);
  agg.offered_erlang = total.offered_intensity(t);
  agg.carried_erlang = total.processed_intensity(t);
  const double n = static_cast<double>(providers.size());
  // Offered-load weighted; in system mode this equals total revenue / total E_in.
  if (agg.offered_erlang > 0.0) {
    agg.c_e = weighted_c_e / agg.offered_erlang;
    agg.c_e_spectrum = weighted_c_e_spectrum / agg.offered_erlang;
    agg.c_e_ratio = total.revenue / agg.offered_erlang;
  } else {
    agg.c_e = plain_c_e / n;
    agg.c_e_spectrum = plain_c_e_spectrum / n;
    agg.c_e_ratio = 0.0;
  }
  agg.interference_mhz = acc.aggregate_interference_peak();
  agg.interference_mean_mhz = acc.aggregate_interference_integral() / (t * cells);
  agg.revenue = total.revenue;
  agg.busy_channel_seconds = total.busy_channel_integral;
  agg.owned_channels = total.owned_channels;
  return report;
}

nlohmann::ordered_json to_json(const ProviderReport& r) {
  nlohmann::ordered_json j;
  if (r.provider > 0) j["provider"] = r.provider;
  j["R_BL"] = r.R_BL;
  j["eta_sys"] = r.eta_sys;
  j["eta_s"] = r.eta_s;
  j["c_e"] = r.c_e;
  j["interference_mhz"] = r.interference_mhz;
  j["interference_mean_mhz"] = r.interference_mean_mhz;
  j["c_e_ratio"] = r.c_e_ratio;
  j["c_e_spectrum"] = r.c_e_spectrum;
  j["processed_calls"] = r.processed_calls;
  j["accepted_calls"] = r.accepted_calls;
  j["blocked_calls"] = r.blocked_calls;
  j["offered_erlang"] = r.offered_erlang;
  j["carried_erlang"] = r.carried_erlang;
  j["revenue"] = r.revenue;
  j["busy_channel_seconds"] = r.busy_channel_seconds;
  j["owned_channels"] = r.owned_channels;
  j["no_traffic"] = r.no_traffic;
  return j;
}

nlohmann::ordered_json to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["horizon_t"] = r.horizon_t;
  j["cost_efficiency_mode"] = to_string(r.cost_efficiency_mode);
  auto& providers = j["providers"] = nlohmann::ordered_json::array();
  for (const auto& p : r.providers) providers.push_back(to_json(p));
  j["aggregate"] = to_json(r.aggregate);
  return j;
}

}  // namespace crshare::metrics
