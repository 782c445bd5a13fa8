#include <cmath>

#include "crshare/cli.h"

namespace crshare::cli {

double sign_test_p(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  // Sum of C(n, k) / 2^n for k >= wins, in log space to stay finite.
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                            n * std::log(2.0);
    p += std::exp(log_term);
  }
  return std::min(p, 1.0);
}

bool CompareResult::has_violation() const {
  for (const auto& r : rows) {
    if (r.violation) return true;
  }
  return false;
}

CompareResult run_compare(const ScenarioConfig& base, int replications, unsigned threads) {
  if (replications < 1) throw ConfigError("reps", "must be >= 1");
  ScenarioConfig config = base;
  apply_defaults(config);
  validate(config);

  CompareResult result;
  result.rows.resize(static_cast<std::size_t>(replications));
  parallel_for(result.rows.size(), threads, [&](std::size_t i) {
    ScenarioConfig on = config;
    on.seed = config.seed + i;
    on.sharing_enabled = true;
    ScenarioConfig off = on;
    off.sharing_enabled = false;
    const auto a = engine::run(on);
    const auto b = engine::run(off);

    PairedRow& row = result.rows[i];
    row.replication = static_cast<int>(i);
    row.seed = on.seed;
    row.R_BL_on = a.report.aggregate.R_BL;
    row.R_BL_off = b.report.aggregate.R_BL;
    row.eta_s_on = a.report.aggregate.eta_s;
    row.eta_s_off = b.report.aggregate.eta_s;
    row.violation = a.violation.has_value() || b.violation.has_value();
  });

  std::vector<double> on, off, eon, eoff, diff, ediff;
  for (const auto& r : result.rows) {
    on.push_back(r.R_BL_on);
    off.push_back(r.R_BL_off);
    eon.push_back(r.eta_s_on);
    eoff.push_back(r.eta_s_off);
    diff.push_back(r.R_BL_on - r.R_BL_off);
    ediff.push_back(r.eta_s_on - r.eta_s_off);
    if (r.R_BL_on < r.R_BL_off) {
      ++result.sharing_better;
    } else if (r.R_BL_on > r.R_BL_off) {
      ++result.sharing_worse;
    } else {
      ++result.ties;
    }
  }
  result.R_BL_on = moments(on);
  result.R_BL_off = moments(off);
  result.eta_s_on = moments(eon);
  result.eta_s_off = moments(eoff);
  result.R_BL_diff = moments(diff);
  result.eta_s_diff = moments(ediff);
  result.sign_test_p = sign_test_p(result.sharing_better, result.sharing_worse);
  return result;
}

nlohmann::ordered_json to_json(const CompareResult& r) {
  auto m = [](const Moments& x) { return nlohmann::ordered_json{{"mean", x.mean}, {"sd", x.sd}}; };
  nlohmann::ordered_json j;
  j["replications"] = r.rows.size();
  j["sharing_on"] = {{"R_BL", m(r.R_BL_on)}, {"eta_s", m(r.eta_s_on)}};
  j["sharing_off"] = {{"R_BL", m(r.R_BL_off)}, {"eta_s", m(r.eta_s_off)}};
  j["paired_difference"] = {{"R_BL_on_minus_off", m(r.R_BL_diff)},
                            {"eta_s_on_minus_off", m(r.eta_s_diff)},
                            {"sharing_lower_blocking", r.sharing_better},
                            {"sharing_higher_blocking", r.sharing_worse},
                            {"ties", r.ties},
                            {"sign_test_p", r.sign_test_p}};
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"replication", row.replication},
                         {"seed", row.seed},
                         {"R_BL_on", row.R_BL_on},
                         {"R_BL_off", row.R_BL_off},
                         {"eta_s_on", row.eta_s_on},
                         {"eta_s_off", row.eta_s_off},
                         {"invariant_violation", row.violation}});
  }
  return j;
}

}  // namespace crshare::cli
