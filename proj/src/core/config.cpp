#include "crshare/config.h"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "crshare/linalg.h"

namespace crshare {

namespace {

using nlohmann::json;

std::string indexed(const std::string& field, std::size_t i) {
  return field + "[" + std::to_string(i) + "]";
}

std::string indexed(const std::string& field, std::size_t i, std::size_t j) {
  return indexed(field, i) + "[" + std::to_string(j) + "]";
}

void require_finite(double v, const std::string& field) {
  if (!std::isfinite(v)) throw ConfigError(field, "must be a finite number");
}

void require_positive(double v, const std::string& field) {
  require_finite(v, field);
  if (v <= 0.0) throw ConfigError(field, "must be > 0 (got " + std::to_string(v) + ")");
}

void require_nonnegative(double v, const std::string& field) {
  require_finite(v, field);
  if (v < 0.0) throw ConfigError(field, "must be >= 0 (got " + std::to_string(v) + ")");
}

void validate_vector(const std::vector<double>& v, std::size_t n, const std::string& field) {
  if (v.size() != n) {
    throw ConfigError(field, "expected " + std::to_string(n) + " entries (one per provider), got " +
                                 std::to_string(v.size()));
  }
  for (std::size_t i = 0; i < v.size(); ++i) require_nonnegative(v[i], indexed(field, i));
}

template <typename T>
T get_as(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field, "has the wrong type (got " + std::string(j.type_name()) + ")");
  }
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "must be a number (got " + std::string(j.type_name()) + ")");
  return j.get<double>();
}

int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) {
    throw ConfigError(field, "must be an integer (got " + std::string(j.type_name()) + ")");
  }
  return j.get<int>();
}

// Scalars are stored as a single entry and broadcast by apply_defaults.
std::vector<double> get_vector_or_scalar(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw ConfigError(field, "must be a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], indexed(field, i)));
  if (out.empty()) throw ConfigError(field, "must not be empty");
  return out;
}

Matrix equicorrelation(std::size_t n, double rho) {
  Matrix m(n, std::vector<double>(n, rho));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

void broadcast(std::vector<double>& v, std::size_t n, double fallback) {
  if (v.empty()) {
    v.assign(n, fallback);
  } else if (v.size() == 1 && n > 1) {
    v.assign(n, v.front());
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "n_providers",        "n_nodes",          "channels_per_provider", "capacity_users_per_channel",
      "mean_rates",         "rate_stddevs",     "rate_correlation",      "mean_rate_scale",
      "mean_holding_time",  "horizon_t",        "seed",                  "sensing_period",
      "cell_radius",        "grid_dims",        "sharing_enabled",       "sharing_group",
      "unit_price_alpha",   "base_frequency_mhz", "channel_spacing_mhz", "uniform_channel_params",
      "max_hops",           "message_delay",    "availability_window",   "cost_efficiency_mode",
      "check_invariants",   "arrival_schedule",
  };
  return keys;
}

}  // namespace

std::size_t ArrivalSchedule::total() const {
  std::size_t n = 0;
  for (const auto& p : per_provider) n += p.size();
  return n;
}

std::vector<double> ScenarioConfig::aggregate_mean_rates() const {
  std::vector<double> out(mean_rates.size());
  for (std::size_t i = 0; i < mean_rates.size(); ++i) {
    out[i] = mean_rates[i] * static_cast<double>(n_nodes) * mean_rate_scale;
  }
  return out;
}

std::vector<double> ScenarioConfig::aggregate_rate_stddevs() const {
  std::vector<double> out(rate_stddevs.size());
  for (std::size_t i = 0; i < rate_stddevs.size(); ++i) {
    out[i] = rate_stddevs[i] * static_cast<double>(n_nodes) * mean_rate_scale;
  }
  return out;
}

std::string to_string(CostEfficiencyMode mode) {
  return mode == CostEfficiencyMode::kSystem ? "system" : "spectrum";
}

void apply_defaults(ScenarioConfig& config) {
  const auto n = static_cast<std::size_t>(std::max(config.n_providers, 0));
  broadcast(config.mean_rates, n, kDefaultMeanRatePerNode);
  broadcast(config.rate_stddevs, n, 0.0);
  broadcast(config.unit_price_alpha, n, kDefaultUnitPrice);
  if (config.rate_correlation.empty()) config.rate_correlation = equicorrelation(n, 0.0);
  if (config.sharing_group == 0) config.sharing_group = config.n_providers;
}

void validate(const ScenarioConfig& c) {
  if (c.n_providers < 1 || c.n_providers > kMaxProviders) {
    throw ConfigError("n_providers", "must be between 1 and " + std::to_string(kMaxProviders) + " (got " +
                                         std::to_string(c.n_providers) + ")");
  }
  const auto n = static_cast<std::size_t>(c.n_providers);
  if (c.n_nodes < 0) throw ConfigError("n_nodes", "must be >= 0");
  if (c.channels_per_provider < 1) throw ConfigError("channels_per_provider", "must be >= 1");
  if (c.capacity_users_per_channel < 1) throw ConfigError("capacity_users_per_channel", "must be >= 1");
  if (c.grid_dims.rows < 1 || c.grid_dims.cols < 1) {
    throw ConfigError("grid_dims", "grid must contain at least one cell (got " + std::to_string(c.grid_dims.rows) +
                                       "x" + std::to_string(c.grid_dims.cols) + ")");
  }

  validate_vector(c.mean_rates, n, "mean_rates");
  validate_vector(c.rate_stddevs, n, "rate_stddevs");
  validate_vector(c.unit_price_alpha, n, "unit_price_alpha");
  require_nonnegative(c.mean_rate_scale, "mean_rate_scale");

  const Matrix& r = c.rate_correlation;
  if (r.size() != n) {
    throw ConfigError("rate_correlation", "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i].size() != n) {
      throw ConfigError(indexed("rate_correlation", i), "expected " + std::to_string(n) + " entries");
    }
    for (std::size_t j = 0; j < n; ++j) {
      require_finite(r[i][j], indexed("rate_correlation", i, j));
      if (std::abs(r[i][j]) > 1.0) {
        throw ConfigError(indexed("rate_correlation", i, j), "correlation must lie in [-1, 1]");
      }
    }
    if (r[i][i] != 1.0) {
      throw ConfigError(indexed("rate_correlation", i, i),
                        "diagonal entry must be 1 (got " + std::to_string(r[i][i]) + ")");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(r[i][j] - r[j][i]) > 1e-12) {
        throw ConfigError(indexed("rate_correlation", i, j), "matrix must be symmetric");
      }
    }
  }
  if (!psd_factor(r)) throw ConfigError("rate_correlation", "matrix is not positive semi-definite");

  require_positive(c.mean_holding_time, "mean_holding_time");
  require_positive(c.horizon_t, "horizon_t");
  require_positive(c.sensing_period, "sensing_period");
  require_positive(c.cell_radius, "cell_radius");
  if (c.sharing_group < 0 || c.sharing_group > c.n_providers) {
    throw ConfigError("sharing_group", "must be between 0 and n_providers");
  }
  require_positive(c.base_frequency_mhz, "base_frequency_mhz");
  require_positive(c.channel_spacing_mhz, "channel_spacing_mhz");
  if (c.max_hops < 0) throw ConfigError("max_hops", "must be >= 0");
  require_positive(c.message_delay, "message_delay");
  if (c.availability_window < 1) throw ConfigError("availability_window", "must be >= 1");

  if (c.arrival_schedule) {
    const auto& per = c.arrival_schedule->per_provider;
    if (per.size() != n) {
      throw ConfigError("arrival_schedule", "expected one list per provider (" + std::to_string(n) + ")");
    }
    for (std::size_t p = 0; p < n; ++p) {
      double last = -1.0;
      for (std::size_t k = 0; k < per[p].size(); ++k) {
        const auto field = indexed("arrival_schedule", p, k);
        const auto& a = per[p][k];
        require_nonnegative(a.time, field);
        require_positive(a.holding, field);
        if (a.time > c.horizon_t) throw ConfigError(field, "arrival time beyond horizon_t");
        if (a.time <= last) throw ConfigError(field, "arrival times must be strictly increasing");
        last = a.time;
      }
    }
  }
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "scenario config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known_keys().contains(key)) throw ConfigError(key, "unknown configuration key");
  }

  ScenarioConfig c;
  auto has = [&](const char* k) { return j.contains(k); };
  if (has("n_providers")) c.n_providers = get_int(j["n_providers"], "n_providers");
  if (has("n_nodes")) c.n_nodes = get_int(j["n_nodes"], "n_nodes");
  if (has("channels_per_provider")) c.channels_per_provider = get_int(j["channels_per_provider"], "channels_per_provider");
  if (has("capacity_users_per_channel")) {
    c.capacity_users_per_channel = get_int(j["capacity_users_per_channel"], "capacity_users_per_channel");
  }
  if (has("mean_rates")) c.mean_rates = get_vector_or_scalar(j["mean_rates"], "mean_rates");
  if (has("rate_stddevs")) c.rate_stddevs = get_vector_or_scalar(j["rate_stddevs"], "rate_stddevs");
  if (has("rate_correlation")) {
    const auto& rc = j["rate_correlation"];
    if (rc.is_number()) {
      c.rate_correlation = equicorrelation(static_cast<std::size_t>(std::max(c.n_providers, 1)), rc.get<double>());
    } else if (rc.is_array()) {
      for (std::size_t i = 0; i < rc.size(); ++i) {
        if (!rc[i].is_array()) throw ConfigError(indexed("rate_correlation", i), "must be an array of numbers");
        std::vector<double> row;
        for (std::size_t k = 0; k < rc[i].size(); ++k) {
          row.push_back(get_number(rc[i][k], indexed("rate_correlation", i, k)));
        }
        c.rate_correlation.push_back(std::move(row));
      }
    } else {
      throw ConfigError("rate_correlation", "must be a number or a square matrix");
    }
  }
  if (has("mean_rate_scale")) c.mean_rate_scale = get_number(j["mean_rate_scale"], "mean_rate_scale");
  if (has("mean_holding_time")) c.mean_holding_time = get_number(j["mean_holding_time"], "mean_holding_time");
  if (has("horizon_t")) c.horizon_t = get_number(j["horizon_t"], "horizon_t");
  if (has("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0)) {
      throw ConfigError("seed", "must be a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (has("sensing_period")) c.sensing_period = get_number(j["sensing_period"], "sensing_period");
  if (has("cell_radius")) c.cell_radius = get_number(j["cell_radius"], "cell_radius");
  if (has("grid_dims")) {
    const auto& g = j["grid_dims"];
    if (!g.is_array() || g.size() != 2) throw ConfigError("grid_dims", "must be [rows, cols]");
    c.grid_dims.rows = get_int(g[0], "grid_dims[0]");
    c.grid_dims.cols = get_int(g[1], "grid_dims[1]");
  }
  if (has("sharing_enabled")) c.sharing_enabled = get_as<bool>(j["sharing_enabled"], "sharing_enabled");
  if (has("sharing_group")) c.sharing_group = get_int(j["sharing_group"], "sharing_group");
  if (has("unit_price_alpha")) c.unit_price_alpha = get_vector_or_scalar(j["unit_price_alpha"], "unit_price_alpha");
  if (has("base_frequency_mhz")) c.base_frequency_mhz = get_number(j["base_frequency_mhz"], "base_frequency_mhz");
  if (has("channel_spacing_mhz")) c.channel_spacing_mhz = get_number(j["channel_spacing_mhz"], "channel_spacing_mhz");
  if (has("uniform_channel_params")) {
    c.uniform_channel_params = get_as<bool>(j["uniform_channel_params"], "uniform_channel_params");
  }
  if (has("max_hops")) c.max_hops = get_int(j["max_hops"], "max_hops");
  if (has("message_delay")) c.message_delay = get_number(j["message_delay"], "message_delay");
  if (has("availability_window")) c.availability_window = get_int(j["availability_window"], "availability_window");
  if (has("cost_efficiency_mode")) {
    const auto mode = get_as<std::string>(j["cost_efficiency_mode"], "cost_efficiency_mode");
    if (mode == "system") {
      c.cost_efficiency_mode = CostEfficiencyMode::kSystem;
    } else if (mode == "spectrum") {
      c.cost_efficiency_mode = CostEfficiencyMode::kSpectrum;
    } else {
      throw ConfigError("cost_efficiency_mode", "must be \"system\" or \"spectrum\" (got \"" + mode + "\")");
    }
  }
  if (has("check_invariants")) c.check_invariants = get_as<bool>(j["check_invariants"], "check_invariants");
  if (has("arrival_schedule")) {
    const auto& s = j["arrival_schedule"];
    if (!s.is_array()) throw ConfigError("arrival_schedule", "must be an array of per-provider lists");
    ArrivalSchedule schedule;
    for (std::size_t p = 0; p < s.size(); ++p) {
      if (!s[p].is_array()) throw ConfigError(indexed("arrival_schedule", p), "must be a list of [time, holding]");
      std::vector<ArrivalRecord> list;
      for (std::size_t k = 0; k < s[p].size(); ++k) {
        const auto field = indexed("arrival_schedule", p, k);
        const auto& e = s[p][k];
        if (!e.is_array() || e.size() != 2) throw ConfigError(field, "must be [time, holding]");
        list.push_back({get_number(e[0], field), get_number(e[1], field)});
      }
      schedule.per_provider.push_back(std::move(list));
    }
    c.arrival_schedule = std::move(schedule);
  }

  apply_defaults(c);
  validate(c);
  return c;
}

nlohmann::ordered_json config_to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["n_providers"] = c.n_providers;
  j["n_nodes"] = c.n_nodes;
  j["channels_per_provider"] = c.channels_per_provider;
  j["capacity_users_per_channel"] = c.capacity_users_per_channel;
  j["mean_rates"] = c.mean_rates;
  j["rate_stddevs"] = c.rate_stddevs;
  j["rate_correlation"] = c.rate_correlation;
  j["mean_rate_scale"] = c.mean_rate_scale;
  j["mean_holding_time"] = c.mean_holding_time;
  j["horizon_t"] = c.horizon_t;
  j["seed"] = c.seed;
  j["sensing_period"] = c.sensing_period;
  j["cell_radius"] = c.cell_radius;
  j["grid_dims"] = {c.grid_dims.rows, c.grid_dims.cols};
  j["sharing_enabled"] = c.sharing_enabled;
  j["sharing_group"] = c.sharing_group;
  j["unit_price_alpha"] = c.unit_price_alpha;
  j["base_frequency_mhz"] = c.base_frequency_mhz;
  j["channel_spacing_mhz"] = c.channel_spacing_mhz;
  j["uniform_channel_params"] = c.uniform_channel_params;
  j["max_hops"] = c.max_hops;
  j["message_delay"] = c.message_delay;
  j["availability_window"] = c.availability_window;
  j["cost_efficiency_mode"] = to_string(c.cost_efficiency_mode);
  j["check_invariants"] = c.check_invariants;
  if (c.arrival_schedule) {
    auto& s = j["arrival_schedule"] = nlohmann::ordered_json::array();
    for (const auto& list : c.arrival_schedule->per_provider) {
      auto row = nlohmann::ordered_json::array();
      for (const auto& a : list) row.push_back({a.time, a.holding});
      s.push_back(std::move(row));
    }
  }
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

void resize_providers(ScenarioConfig& c, int n_providers) {
  const auto n = static_cast<std::size_t>(n_providers);
  auto resize = [n](std::vector<double>& v) {
    if (v.empty()) return;
    const double last = v.back();
    v.resize(n, last);
  };
  resize(c.mean_rates);
  resize(c.rate_stddevs);
  resize(c.unit_price_alpha);

  const std::size_t old = c.rate_correlation.size();
  if (old != n) {
    double off_sum = 0.0;
    std::size_t off_count = 0;
    for (std::size_t i = 0; i < old; ++i) {
      for (std::size_t j = 0; j < old; ++j) {
        if (i != j) {
          off_sum += c.rate_correlation[i][j];
          ++off_count;
        }
      }
    }
    const double rho = off_count == 0 ? 0.0 : off_sum / static_cast<double>(off_count);
    Matrix m = equicorrelation(n, rho);
    for (std::size_t i = 0; i < std::min(old, n); ++i) {
      for (std::size_t j = 0; j < std::min(old, n); ++j) m[i][j] = c.rate_correlation[i][j];
    }
    c.rate_correlation = std::move(m);
  }
  if (c.sharing_group > n_providers || c.sharing_group == c.n_providers) c.sharing_group = n_providers;
  c.n_providers = n_providers;
}

}  // namespace crshare
