#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace crshare {

// Raised for anything wrong with a scenario or sweep description. `field`
// names the offending key (JSON-pointer-ish, e.g. "rate_correlation[1][1]").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

using Matrix = std::vector<std::vector<double>>;

enum class CostEfficiencyMode {
  kSystem,    // c_e = alpha * t * eta_sys (ratio c / E_in)
  kSpectrum,  // c_e = alpha * t * eta_s
};

struct ArrivalRecord {
  double time = 0.0;
  double holding = 0.0;

  friend bool operator==(const ArrivalRecord&, const ArrivalRecord&) = default;
};

// Per-provider arrival lists, each sorted by strictly increasing time.
struct ArrivalSchedule {
  std::vector<std::vector<ArrivalRecord>> per_provider;

  std::size_t total() const;
  friend bool operator==(const ArrivalSchedule&, const ArrivalSchedule&) = default;
};

struct GridDims {
  int rows = 1;
  int cols = 1;
};

struct ScenarioConfig {
  int n_providers = 5;
  int n_nodes = 150;
  int channels_per_provider = 3;
  int capacity_users_per_channel = 10;

  // Per mobile node, per provider (calls/s). Provider i's mean aggregate rate
  // is n_nodes * mean_rate_scale * mean_rates[i].
  std::vector<double> mean_rates;
  std::vector<double> rate_stddevs;  // same units as mean_rates
  Matrix rate_correlation;
  double mean_rate_scale = 1.0;
  double mean_holding_time = 120.0;
  double horizon_t = 3600.0;
  std::uint64_t seed = 1;

  double sensing_period = 1.0;
  double cell_radius = 1000.0;
  GridDims grid_dims;

  bool sharing_enabled = true;
  // Providers 1..sharing_group lend and borrow; the rest only use their own
  // channels. 0 means every provider.
  int sharing_group = 0;

  std::vector<double> unit_price_alpha;
  double base_frequency_mhz = 900.0;
  double channel_spacing_mhz = 5.0;
  bool uniform_channel_params = true;

  int max_hops = 1;
  double message_delay = 1e-3;
  int availability_window = 10;

  CostEfficiencyMode cost_efficiency_mode = CostEfficiencyMode::kSystem;
  bool check_invariants = true;

  // When set, replaces the generated Poisson arrivals.
  std::optional<ArrivalSchedule> arrival_schedule;

  // Mean aggregate arrival rate of each provider.
  std::vector<double> aggregate_mean_rates() const;
  std::vector<double> aggregate_rate_stddevs() const;
  int cell_count() const { return grid_dims.rows * grid_dims.cols; }
  bool provider_shares(std::size_t provider) const {
    const int group = sharing_group == 0 ? n_providers : sharing_group;
    return sharing_enabled && group > 1 && static_cast<int>(provider) < group;
  }
};

inline constexpr int kMaxProviders = 5;
inline constexpr double kDefaultMeanRatePerNode = 4.0e-4;
inline constexpr double kDefaultUnitPrice = 0.02;

// Fills per-provider vectors left empty with their defaults; sizes the
// correlation matrix to identity when absent.
void apply_defaults(ScenarioConfig& config);

// Throws ConfigError naming the first offending field.
void validate(const ScenarioConfig& config);

// Strict parse: unknown keys are rejected. Scalars are accepted for
// mean_rates, rate_stddevs, unit_price_alpha (broadcast) and
// rate_correlation (equicorrelation coefficient).
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::filesystem::path& path);

// Parses a file into JSON, translating I/O and syntax failures into
// ConfigError with the path and line information.
nlohmann::json read_json_file(const std::filesystem::path& path);

// Resizes provider-indexed fields after n_providers changed (truncates or
// repeats the last entry; correlation is cut or padded with the mean
// off-diagonal coefficient).
void resize_providers(ScenarioConfig& config, int n_providers);

std::string to_string(CostEfficiencyMode mode);

}  // namespace crshare
