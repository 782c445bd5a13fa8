#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "crshare/config.h"
#include "crshare/ids.h"
#include "crshare/topology.h"

namespace crshare::metrics {

// Raw per-provider counters and integrals. Merging (operator+=) is
// associative and commutative, so replications can be pooled in any order.
struct ProviderMetrics {
  std::uint64_t blocked_calls = 0;    // n_BL
  std::uint64_t processed_calls = 0;  // n_processed = accepted + blocked
  std::uint64_t accepted_calls = 0;
  double offered_holding = 0.0;   // seconds; E_in * t
  double accepted_holding = 0.0;  // seconds; E_p * t
  double revenue = 0.0;           // c = alpha * accepted_holding
  double busy_channel_integral = 0.0;  // channel-seconds over owned channels
  std::uint64_t owned_channels = 0;    // N_ch-total, counted per cell
  double interference_peak_mhz = 0.0;
  double interference_integral = 0.0;  // MHz-seconds summed over cells

  double processed_intensity(double t) const { return accepted_holding / t; }
  double offered_intensity(double t) const { return offered_holding / t; }

  ProviderMetrics& operator+=(const ProviderMetrics& other);
  friend bool operator==(const ProviderMetrics&, const ProviderMetrics&) = default;
};

// A metric value plus a flag for the degenerate case (no traffic / idle).
struct Flagged {
  double value = 0.0;
  bool flag = false;
};

// R_BL = sum blocked / sum processed; 0 with the flag set when nothing was
// processed.
Flagged blocking_rate(std::span<const ProviderMetrics> providers);
Flagged blocking_rate(const ProviderMetrics& provider);

// eta_sys = E_p / E_in; 1 with the flag set when no traffic was offered.
Flagged system_efficiency(const ProviderMetrics& pm);

// Time-averaged fraction of owned channels busy over [0, horizon]. Throws
// ConfigError when no channels are owned.
double spectrum_efficiency(double busy_channel_integral, double owned_channels, double horizon);
double spectrum_efficiency(const ProviderMetrics& pm, double horizon);

// c_e = alpha * t * eta.
double cost_efficiency(double alpha, double horizon, double eta);

// |f_max - f_min| over the channels in use; 0 with the flag set when empty.
Flagged interference(std::span<const double> frequencies_mhz);
Flagged interference(std::span<const Channel> channels_in_use);

// Incremental accumulation during a run. Occupancy integrals are advanced to
// the event time before every change, and capped at the horizon.
class MetricsAccumulator {
 public:
  MetricsAccumulator(std::span<const Channel> channels, std::size_t n_providers, std::size_t n_cells,
                     double horizon);

  void record_offered(ProviderId provider, double holding);
  void record_accepted(ProviderId provider, double holding, double alpha);
  void record_blocked(ProviderId provider);

  // Sets which provider (if any) currently has calls on (cell, channel).
  void set_channel_user(double now, CellId cell, ChannelId channel, std::optional<ProviderId> user);

  // Integrates up to the horizon; call once after the last event.
  void finish();

  double horizon() const { return horizon_; }
  std::size_t n_cells() const { return n_cells_; }
  const std::vector<ProviderMetrics>& providers() const { return providers_; }
  double aggregate_interference_peak() const { return agg_peak_; }
  double aggregate_interference_integral() const { return agg_integral_; }
  std::size_t busy_channels(ProviderId owner) const { return busy_by_owner_[owner.index()]; }

 private:
  void advance(double now);
  void refresh_cell_spread(CellId cell);

  std::span<const Channel> channels_;
  std::size_t n_providers_;
  std::size_t n_cells_;
  double horizon_;
  double last_update_ = 0.0;

  std::vector<ProviderMetrics> providers_;
  std::vector<std::optional<ProviderId>> users_;  // [cell * channels + channel]
  std::vector<std::size_t> busy_by_owner_;
  std::vector<double> cell_spread_;           // all users, per cell
  std::vector<double> provider_cell_spread_;  // [cell * providers + provider]
  double agg_peak_ = 0.0;
  double agg_integral_ = 0.0;
};

struct ProviderReport {
  int provider = 0;  // 1-based; 0 for the aggregate row
  std::uint64_t processed_calls = 0;
  std::uint64_t accepted_calls = 0;
  std::uint64_t blocked_calls = 0;
  double R_BL = 0.0;
  double eta_sys = 1.0;
  double eta_s = 0.0;
  double c_e = 0.0;
  double c_e_ratio = 0.0;     // c / E_in
  double c_e_spectrum = 0.0;  // alpha * t * eta_s
  double interference_mhz = 0.0;       // run-level peak spread
  double interference_mean_mhz = 0.0;  // time- and cell-averaged spread
  double offered_erlang = 0.0;
  double carried_erlang = 0.0;
  double revenue = 0.0;
  double busy_channel_seconds = 0.0;
  std::uint64_t owned_channels = 0;
  bool no_traffic = false;
};

struct MetricReport {
  double horizon_t = 0.0;
  CostEfficiencyMode cost_efficiency_mode = CostEfficiencyMode::kSystem;
  std::vector<ProviderReport> providers;
  ProviderReport aggregate;
};

MetricReport build_report(const MetricsAccumulator& acc, std::span<const double> unit_prices,
                          CostEfficiencyMode mode);

nlohmann::ordered_json to_json(const ProviderReport& r);
nlohmann::ordered_json to_json(const MetricReport& r);

}  // namespace crshare::metrics
