#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "crshare/cli.h"

namespace crshare::cli {

using nlohmann::json;

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kNodes: return "n_nodes";
    case SweepParameter::kProviders: return "n_providers";
    case SweepParameter::kRateScale: return "mean_rate_scale";
  }
  return "unknown";
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

SweepSpec sweep_spec_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("", "sweep spec must be a JSON object");
  static const std::set<std::string> known{"parameter",   "values",      "provider_groups", "replications",
                                           "base_seed",   "base_config", "base_config_path"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError(key, "unknown sweep key");
  }

  SweepSpec spec;
  if (!j.contains("parameter") || !j["parameter"].is_string()) {
    throw ConfigError("parameter", "must be one of n_nodes, n_providers, mean_rate_scale");
  }
  const auto name = j["parameter"].get<std::string>();
  if (name == "n_nodes") {
    spec.parameter = SweepParameter::kNodes;
  } else if (name == "n_providers") {
    spec.parameter = SweepParameter::kProviders;
  } else if (name == "mean_rate_scale") {
    spec.parameter = SweepParameter::kRateScale;
  } else {
    throw ConfigError("parameter", "must be one of n_nodes, n_providers, mean_rate_scale (got \"" + name + "\")");
  }

  if (!j.contains("values") || !j["values"].is_array() || j["values"].empty()) {
    throw ConfigError("values", "must be a non-empty array of numbers");
  }
  for (std::size_t i = 0; i < j["values"].size(); ++i) {
    const auto& v = j["values"][i];
    const std::string field = "values[" + std::to_string(i) + "]";
    if (!v.is_number()) throw ConfigError(field, "must be a number");
    const double x = v.get<double>();
    if (spec.parameter != SweepParameter::kRateScale && (!v.is_number_integer() || x < 0)) {
      throw ConfigError(field, "must be a non-negative integer for " + name);
    }
    if (spec.parameter == SweepParameter::kProviders && (x < 1 || x > kMaxProviders)) {
      throw ConfigError(field, "provider count must be between 1 and " + std::to_string(kMaxProviders));
    }
    if (!std::isfinite(x) || x < 0) throw ConfigError(field, "must be >= 0");
    spec.values.push_back(x);
  }

  if (j.contains("provider_groups")) {
    const auto& g = j["provider_groups"];
    if (!g.is_array() || g.empty()) throw ConfigError("provider_groups", "must be a non-empty array of integers");
    spec.provider_groups.clear();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g[i].is_number_integer() || g[i].get<int>() < 1 || g[i].get<int>() > kMaxProviders) {
        throw ConfigError("provider_groups[" + std::to_string(i) + "]",
                          "must be an integer between 1 and " + std::to_string(kMaxProviders));
      }
      spec.provider_groups.push_back(g[i].get<int>());
    }
  }

  if (!j.contains("replications") || !j["replications"].is_number_integer() || j["replications"].get<int>() < 1) {
    throw ConfigError("replications", "must be an integer >= 1");
  }
  spec.replications = j["replications"].get<int>();

  if (j.contains("base_config") == j.contains("base_config_path")) {
    throw ConfigError("base_config", "give exactly one of base_config or base_config_path");
  }
  if (j.contains("base_config")) {
    spec.base_config = config_from_json(j["base_config"]);
  } else {
    if (!j["base_config_path"].is_string()) throw ConfigError("base_config_path", "must be a string");
    std::filesystem::path p = j["base_config_path"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    spec.base_config = load_config(p);
  }
  apply_defaults(spec.base_config);
  validate(spec.base_config);

  spec.base_seed = spec.base_config.seed;
  if (j.contains("base_seed")) {
    if (!j["base_seed"].is_number_integer() || j["base_seed"].get<std::int64_t>() < 0) {
      throw ConfigError("base_seed", "must be a non-negative integer");
    }
    spec.base_seed = j["base_seed"].get<std::uint64_t>();
  }
  return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  return sweep_spec_from_json(read_json_file(path), path.parent_path());
}

ScenarioConfig sweep_point_config(const SweepSpec& spec, double value, int group, int replication) {
  ScenarioConfig c = spec.base_config;
  switch (spec.parameter) {
    case SweepParameter::kNodes: c.n_nodes = static_cast<int>(std::lround(value)); break;
    case SweepParameter::kProviders: resize_providers(c, static_cast<int>(std::lround(value))); break;
    case SweepParameter::kRateScale: c.mean_rate_scale = value; break;
  }
  c.sharing_group = std::min(group, c.n_providers);
  c.seed = spec.base_seed + static_cast<std::uint64_t>(replication);
  apply_defaults(c);
  validate(c);
  return c;
}

SweepRow make_sweep_row(double value, int group, int replication, const ScenarioConfig& config,
                        const engine::RunResult& run) {
  SweepRow row;
  row.param_value = value;
  row.provider_group = group;
  row.replication = replication;
  row.seed = config.seed;
  row.aggregate = run.report.aggregate;
  row.active_users_peak = run.active_users_peak;
  row.traffic_load = run.report.aggregate.offered_erlang;
  const double slots = static_cast<double>(config.n_providers) * config.channels_per_provider *
                       config.capacity_users_per_channel * config.cell_count();
  row.traffic_load_pct = 100.0 * row.traffic_load / slots;
  row.violation = run.violation;
  return row;
}

void sort_rows(std::vector<SweepRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.param_value, a.provider_group, a.replication) <
           std::tie(b.param_value, b.provider_group, b.replication);
  });
}

std::vector<SweepSummaryRow> summarize(const std::vector<SweepRow>& rows) {
  std::map<std::pair<double, int>, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) groups[{r.param_value, r.provider_group}].push_back(&r);

  std::vector<SweepSummaryRow> out;
  for (const auto& [key, members] : groups) {
    auto collect = [&](auto get) {
      std::vector<double> xs;
      for (const SweepRow* r : members) xs.push_back(get(*r));
      return moments(xs);
    };
    SweepSummaryRow s;
    s.param_value = key.first;
    s.provider_group = key.second;
    s.replications = static_cast<int>(members.size());
    s.R_BL = collect([](const SweepRow& r) { return r.aggregate.R_BL; });
    s.eta_sys = collect([](const SweepRow& r) { return r.aggregate.eta_sys; });
    s.eta_s = collect([](const SweepRow& r) { return r.aggregate.eta_s; });
    s.c_e = collect([](const SweepRow& r) { return r.aggregate.c_e; });
    s.interference_mhz = collect([](const SweepRow& r) { return r.aggregate.interference_mhz; });
    s.active_users_peak = collect([](const SweepRow& r) { return static_cast<double>(r.active_users_peak); });
    s.traffic_load = collect([](const SweepRow& r) { return r.traffic_load; });
    s.traffic_load_pct = collect([](const SweepRow& r) { return r.traffic_load_pct; });
    out.push_back(s);
  }
  return out;
}

bool SweepResult::has_violation() const {
  return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.violation.has_value(); });
}

SweepResult run_sweep(const SweepSpec& spec, unsigned threads) {
  struct Point {
    double value;
    int group;
    int replication;
  };
  std::vector<Point> points;
  for (double v : spec.values) {
    for (int g : spec.provider_groups) {
      for (int r = 0; r < spec.replications; ++r) points.push_back({v, g, r});
    }
  }

  SweepResult result;
  result.parameter = spec.parameter;
  result.rows.resize(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    const Point& p = points[i];
    const ScenarioConfig config = sweep_point_config(spec, p.value, p.group, p.replication);
    result.rows[i] = make_sweep_row(p.value, p.group, p.replication, config, engine::run(config));
  });
  sort_rows(result.rows);
  result.summary = summarize(result.rows);
  return result;
}

namespace {

void write_number(std::ostream& os, double x) {
  if (std::isfinite(x)) {
    os << x;
  } else {
    os << "nan";
  }
}

}  // namespace

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << "param_value,provider_group,replication,seed,R_BL,eta_sys,eta_s,c_e,interference_mhz,"
        "active_users_peak,traffic_load,traffic_load_pct\n";
  os.precision(12);
  for (const auto& r : result.rows) {
    os << r.param_value << ',' << r.provider_group << ',' << r.replication << ',' << r.seed << ',';
    for (double x : {r.aggregate.R_BL, r.aggregate.eta_sys, r.aggregate.eta_s, r.aggregate.c_e,
                     r.aggregate.interference_mhz}) {
      write_number(os, x);
      os << ',';
    }
    os << r.active_users_peak << ',';
    write_number(os, r.traffic_load);
    os << ',';
    write_number(os, r.traffic_load_pct);
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const SweepResult& result) {
  os << "param_value,provider_group,replications";
  for (const char* name : {"R_BL", "eta_sys", "eta_s", "c_e", "interference_mhz", "active_users_peak",
                           "traffic_load", "traffic_load_pct"}) {
    os << ',' << name << "_mean," << name << "_sd";
  }
  os << '\n';
  os.precision(12);
  for (const auto& s : result.summary) {
    os << s.param_value << ',' << s.provider_group << ',' << s.replications;
    for (const Moments& m : {s.R_BL, s.eta_sys, s.eta_s, s.c_e, s.interference_mhz, s.active_users_peak,
                             s.traffic_load, s.traffic_load_pct}) {
      os << ',';
      write_number(os, m.mean);
      os << ',';
      write_number(os, m.sd);
    }
    os << '\n';
  }
}

nlohmann::ordered_json to_json(const SweepResult& result) {
  nlohmann::ordered_json j;
  j["parameter"] = to_string(result.parameter);
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) {
    nlohmann::ordered_json row;
    row["param_value"] = r.param_value;
    row["provider_group"] = r.provider_group;
    row["replication"] = r.replication;
    row["seed"] = r.seed;
    row["metrics"] = metrics::to_json(r.aggregate);
    row["active_users_peak"] = r.active_users_peak;
    row["traffic_load"] = r.traffic_load;
    row["traffic_load_pct"] = r.traffic_load_pct;
    if (r.violation) row["invariant_violation"] = r.violation->message;
    j["rows"].push_back(std::move(row));
  }
  auto m = [](const Moments& x) { return nlohmann::ordered_json{{"mean", x.mean}, {"sd", x.sd}}; };
  j["summary"] = nlohmann::ordered_json::array();
  for (const auto& s : result.summary) {
    j["summary"].push_back({{"param_value", s.param_value},
                            {"provider_group", s.provider_group},
                            {"replications", s.replications},
                            {"R_BL", m(s.R_BL)},
                            {"eta_sys", m(s.eta_sys)},
                            {"eta_s", m(s.eta_s)},
                            {"c_e", m(s.c_e)},
                            {"interference_mhz", m(s.interference_mhz)},
                            {"active_users_peak", m(s.active_users_peak)},
                            {"traffic_load", m(s.traffic_load)},
                            {"traffic_load_pct", m(s.traffic_load_pct)}});
  }
  return j;
}

}  // namespace crshare::cli
