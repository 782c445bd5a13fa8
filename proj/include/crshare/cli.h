#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "crshare/config.h"
#include "crshare/engine.h"

namespace crshare::cli {

enum class SweepParameter { kNodes, kProviders, kRateScale };

std::string to_string(SweepParameter p);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kNodes;
  std::vector<double> values;
  std::vector<int> provider_groups{1, 3, 5};
  int replications = 1;
  std::uint64_t base_seed = 1;
  ScenarioConfig base_config;
};

// Keys: parameter, values, provider_groups (optional), replications,
// base_seed (optional, defaults to the base config seed) and either
// base_config (inline object) or base_config_path (relative to base_dir).
SweepSpec sweep_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

// Config for one sweep point: the parameter applied, the sharing group
// clipped to the provider count and the seed base_seed + replication.
ScenarioConfig sweep_point_config(const SweepSpec& spec, double value, int group, int replication);

struct SweepRow {
  double param_value = 0.0;
  int provider_group = 0;
  int replication = 0;
  std::uint64_t seed = 0;
  metrics::ProviderReport aggregate;
  std::size_t active_users_peak = 0;
  double traffic_load = 0.0;      // offered Erlang
  double traffic_load_pct = 0.0;  // offered Erlang over slot capacity, percent
  std::optional<engine::InvariantViolation> violation;
};

struct Moments {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
};

Moments moments(const std::vector<double>& xs);

struct SweepSummaryRow {
  double param_value = 0.0;
  int provider_group = 0;
  int replications = 0;
  Moments R_BL, eta_sys, eta_s, c_e, interference_mhz, active_users_peak, traffic_load, traffic_load_pct;
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::kNodes;
  std::vector<SweepRow> rows;  // sorted by (param_value, group, replication)
  std::vector<SweepSummaryRow> summary;

  bool has_violation() const;
};

SweepRow make_sweep_row(double value, int group, int replication, const ScenarioConfig& config,
                        const engine::RunResult& run);
void sort_rows(std::vector<SweepRow>& rows);
std::vector<SweepSummaryRow> summarize(const std::vector<SweepRow>& rows);

SweepResult run_sweep(const SweepSpec& spec, unsigned threads);

void write_sweep_csv(std::ostream& os, const SweepResult& result);
void write_summary_csv(std::ostream& os, const SweepResult& result);
nlohmann::ordered_json to_json(const SweepResult& result);

struct PairedRow {
  int replication = 0;
  std::uint64_t seed = 0;
  double R_BL_on = 0.0, R_BL_off = 0.0;
  double eta_s_on = 0.0, eta_s_off = 0.0;
  bool violation = false;
};

struct CompareResult {
  std::vector<PairedRow> rows;
  Moments R_BL_on, R_BL_off, eta_s_on, eta_s_off;
  Moments R_BL_diff;  // on - off
  Moments eta_s_diff;
  int sharing_better = 0;  // replications with R_BL_on < R_BL_off
  int sharing_worse = 0;
  int ties = 0;
  double sign_test_p = 1.0;  // one-sided, ties dropped

  bool has_violation() const;
};

// P(X >= wins) for X ~ Binomial(wins + losses, 1/2); 1 when there are no
// untied pairs.
double sign_test_p(int wins, int losses);

CompareResult run_compare(const ScenarioConfig& config, int replications, unsigned threads);
nlohmann::ordered_json to_json(const CompareResult& result);

// Calls fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written to slot i, so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

unsigned default_threads();

}  // namespace crshare::cli
