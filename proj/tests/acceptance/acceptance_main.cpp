// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "crshare/cli.h"
#include "crshare/engine.h"
#include "crshare/rng.h"
#include "crshare/topology.h"
#include "crshare/traffic.h"
#include "support/scenarios.h"
#include "support/trace_oracle.h"

using namespace crshare;

namespace {

constexpr double kOracleRelTol = 1e-9;
constexpr double kOracleBudgetS = 10.0;
constexpr double kSharingBudgetS = 120.0;
constexpr double kSharingAlpha = 0.05;
constexpr int kSharingReps = 30;
constexpr double kCorrelationTol = 0.02;
constexpr int kCorrelationDraws = 100000;
constexpr int kPoissonReps = 10000;
constexpr double kPoissonSigmas = 3.0;
constexpr double kTrafficBudgetS = 30.0;
constexpr double kScaleBudgetS = 60.0;
constexpr std::uint64_t kScaleEvents = 100000;

const std::string kConfigDir = CRSHARE_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Shared by criteria 1, 2 and 8.
struct MicroRun {
  ScenarioConfig config;
  engine::RunResult result;
  testing::OracleResult oracle;
};

std::vector<MicroRun>& micro_runs(double* elapsed = nullptr) {
  static std::vector<MicroRun> runs;
  static double took = 0.0;
  if (runs.empty()) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      MicroRun m;
      m.config = testing::micro_scenario(seed, 50);
      m.result = engine::run(m.config, {true, true});
      m.oracle = testing::replay_trace(m.config, m.result);
      runs.push_back(std::move(m));
    }
    took = seconds_since(t0);
  }
  if (elapsed) *elapsed = took;
  return runs;
}

Outcome metric_oracle() {
  double took = 0.0;
  auto& runs = micro_runs(&took);
  int mismatches = 0;
  std::size_t max_calls = 0;
  for (const auto& m : runs) {
    max_calls = std::max(max_calls, m.result.calls.size());
    const auto& rep = m.result.report;
    for (std::size_t p = 0; p < rep.providers.size(); ++p) {
      const double eta_s = m.oracle.providers[p].busy_integral /
                           (testing::owned_channel_cells(m.config) * m.config.horizon_t);
      if (!testing::close_rel(rep.providers[p].R_BL, m.oracle.blocking_rate(p), kOracleRelTol) ||
          !testing::close_rel(rep.providers[p].eta_sys, m.oracle.system_efficiency(p), kOracleRelTol) ||
          !testing::close_rel(rep.providers[p].eta_s, eta_s, kOracleRelTol)) {
        ++mismatches;
      }
    }
    if (!testing::close_rel(rep.aggregate.R_BL, m.oracle.blocking_rate(), kOracleRelTol) ||
        !testing::close_rel(rep.aggregate.eta_sys, m.oracle.system_efficiency(), kOracleRelTol)) {
      ++mismatches;
    }
  }
  return {mismatches == 0 && max_calls <= 50 && took < kOracleBudgetS,
          fmt("100 runs, <= %zu calls each, %d mismatches at rel 1e-9, %.2f s (budget %.0f s)", max_calls,
              mismatches, took, kOracleBudgetS)};
}

Outcome conservation() {
  auto& runs = micro_runs();
  std::size_t findings = 0, violations = 0, borrows = 0;
  for (const auto& m : runs) {
    findings += m.oracle.violations.size();
    violations += m.result.violation ? 1 : 0;
    borrows += m.result.protocol.borrows;
  }
  return {findings == 0 && violations == 0,
          fmt("trace replay findings %zu, engine invariant violations %zu (%zu borrows exercised)", findings,
              violations, borrows)};
}

Outcome hand_trace() {
  ScenarioConfig c;
  c.n_providers = 1;
  c.channels_per_provider = 1;
  c.capacity_users_per_channel = 1;
  c.horizon_t = 10.0;
  c.arrival_schedule = ArrivalSchedule{{{{0.0, 5.0}, {1.0, 5.0}}}};
  apply_defaults(c);
  const auto r = engine::run(c);
  const auto& p = r.report.providers[0];
  // Offered: two 5 s holds; carried: the first one only.
  const double expected_eta_sys = (5.0 / c.horizon_t) / ((5.0 + 5.0) / c.horizon_t);
  const bool pass = p.R_BL == 0.5 && p.eta_sys == expected_eta_sys && p.blocked_calls == 1;
  return {pass, fmt("R_BL %.17g (want 0.5), eta_sys %.17g (want %.17g)", p.R_BL, p.eta_sys, expected_eta_sys)};
}

Outcome zero_blocking_rows() {
  // Random single-cell schedules whose concurrent demand per provider never
  // exceeds its own capacity.
  int tested = 0, failures = 0;
  std::mt19937_64 rng(404);
  while (tested < 200) {
    ScenarioConfig c;
    c.n_providers = 1 + static_cast<int>(rng() % 5);
    c.channels_per_provider = 1 + static_cast<int>(rng() % 3);
    c.capacity_users_per_channel = 1 + static_cast<int>(rng() % 4);
    c.horizon_t = 200.0;
    apply_defaults(c);
    const auto cap = c.channels_per_provider * c.capacity_users_per_channel;
    ArrivalSchedule s;
    s.per_provider.resize(static_cast<std::size_t>(c.n_providers));
    bool fits = true;
    for (auto& list : s.per_provider) {
      double t = 0.0;
      const int n = static_cast<int>(rng() % 30);
      for (int k = 0; k < n; ++k) {
        t += std::exponential_distribution<double>(0.3)(rng) + 1e-6;
        if (t > c.horizon_t) break;
        list.push_back({t, std::exponential_distribution<double>(1.0 / 20.0)(rng) + 1e-3});
      }
      for (const auto& a : list) {
        int concurrent = 0;
        for (const auto& b : list) concurrent += (b.time <= a.time && b.time + b.holding > a.time) ? 1 : 0;
        fits = fits && concurrent <= cap;
      }
    }
    if (!fits) continue;
    c.arrival_schedule = s;
    ++tested;
    const auto r = engine::run(c);
    for (const auto& p : r.report.providers) failures += (p.eta_sys == 1.0 && p.R_BL == 0.0) ? 0 : 1;
  }
  // Low-load rows of the node sweep.
  auto pm = load_config(kConfigDir + "/node_sweep_base.json");
  int pm_failures = 0;
  for (int nodes : {20, 40, 60}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto c = pm;
      c.n_nodes = nodes;
      c.seed = seed;
      apply_defaults(c);
      const auto r = engine::run(c);
      for (const auto& p : r.report.providers) pm_failures += p.eta_sys == 1.0 ? 0 : 1;
    }
  }
  return {failures == 0 && pm_failures == 0,
          fmt("%d under-capacity schedules: %d providers off 1.0; node-sweep 20-60 nodes: %d off 1.0", tested,
              failures, pm_failures)};
}

Outcome sharing_dominance() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto base = load_config(kConfigDir + "/asymmetric.json");
  std::ostringstream detail;
  bool pass = true;
  const std::vector<double> scales{1.0, 1.5, 2.0};
  for (double s : scales) {
    auto c = base;
    c.mean_rate_scale = s;
    const auto r = cli::run_compare(c, kSharingReps, cli::default_threads());
    const bool heaviest = s == scales.back();
    bool ok = r.R_BL_on.mean <= r.R_BL_off.mean && !r.has_violation();
    if (heaviest) ok = ok && r.R_BL_on.mean < r.R_BL_off.mean && r.sign_test_p < kSharingAlpha;
    pass = pass && ok;
    detail << fmt("x%.1f on %.4f off %.4f p %.2g; ", s, r.R_BL_on.mean, r.R_BL_off.mean, r.sign_test_p);
  }
  const double took = seconds_since(t0);
  pass = pass && took < kSharingBudgetS;
  detail << fmt("%.1f s (budget %.0f s)", took, kSharingBudgetS);
  return {pass, detail.str()};
}

Outcome table2_trend() {
  const auto spec = cli::load_sweep_spec(kConfigDir + "/node_sweep.json");
  const auto result = cli::run_sweep(spec, cli::default_threads());
  bool low_zero = true;
  double r1 = -1, r3 = -1, r5 = -1;
  for (const auto& s : result.summary) {
    if (s.param_value >= 20 && s.param_value <= 60) low_zero = low_zero && s.R_BL.mean == 0.0;
    if (s.param_value == 100) {
      if (s.provider_group == 1) r1 = s.R_BL.mean;
      if (s.provider_group == 3) r3 = s.R_BL.mean;
      if (s.provider_group == 5) r5 = s.R_BL.mean;
    }
  }
  const bool pass = low_zero && r1 > r3 && r3 > r5 && r5 > 0.0 && !result.has_violation();
  return {pass, fmt("%zu rows; R_BL zero at 20-60 nodes: %s; at 100 nodes %.4f > %.4f > %.4f", result.rows.size(),
                    low_zero ? "yes" : "no", r1, r3, r5)};
}

Outcome traffic_statistics() {
  const auto t0 = std::chrono::steady_clock::now();
  traffic::TrafficModel m;
  m.mean_rates = {0.5, 0.4, 0.3};
  m.rate_stddevs = {0.05, 0.04, 0.03};
  m.correlation = {{1.0, 0.8, 0.3}, {0.8, 1.0, 0.5}, {0.3, 0.5, 1.0}};
  const traffic::CorrelatedRateSampler sampler(m);
  auto rng = make_stream(2024, StreamPurpose::kRates);
  const std::size_t n = m.mean_rates.size();
  std::vector<double> sum(n, 0.0);
  std::vector<std::vector<double>> cross(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < kCorrelationDraws; ++i) {
    const auto x = sampler.draw(rng);
    for (std::size_t a = 0; a < n; ++a) {
      sum[a] += x[a];
      for (std::size_t b = 0; b < n; ++b) cross[a][b] += x[a] * x[b];
    }
  }
  double worst_corr = 0.0;
  const double draws = kCorrelationDraws;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double cov = cross[a][b] / draws - sum[a] * sum[b] / (draws * draws);
      const double va = cross[a][a] / draws - sum[a] * sum[a] / (draws * draws);
      const double vb = cross[b][b] / draws - sum[b] * sum[b] / (draws * draws);
      worst_corr = std::max(worst_corr, std::abs(cov / std::sqrt(va * vb) - m.correlation[a][b]));
    }
  }

  const std::vector<double> rates{0.1, 0.02};
  const double horizon = 1000.0;
  std::vector<double> counts(rates.size(), 0.0);
  for (int r = 0; r < kPoissonReps; ++r) {
    const auto s = traffic::generate_arrivals(rates, 60.0, horizon, 50000 + static_cast<std::uint64_t>(r));
    for (std::size_t p = 0; p < rates.size(); ++p) counts[p] += static_cast<double>(s.per_provider[p].size());
  }
  double worst_z = 0.0;
  for (std::size_t p = 0; p < rates.size(); ++p) {
    const double lt = rates[p] * horizon;
    worst_z = std::max(worst_z, std::abs(counts[p] / kPoissonReps - lt) / std::sqrt(lt / kPoissonReps));
  }
  const double took = seconds_since(t0);
  return {worst_corr <= kCorrelationTol && worst_z <= kPoissonSigmas && took < kTrafficBudgetS,
          fmt("max |corr error| %.4f (tol %.2f); max Poisson z %.2f (tol %.0f); %.1f s (budget %.0f s)", worst_corr,
              kCorrelationTol, worst_z, kPoissonSigmas, took, kTrafficBudgetS)};
}

std::size_t bfs_size(const Topology& t, NodeId start, int depth) {
  std::set<std::uint32_t> seen{start.value};
  std::vector<NodeId> frontier{start};
  for (int d = 0; d < depth; ++d) {
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      for (NodeId w : t.nodes[v.index()].neighbors) {
        if (seen.insert(w.value).second) next.push_back(w);
      }
    }
    frontier = next;
  }
  return seen.size();
}

Outcome protocol_bounds() {
  std::vector<std::pair<ScenarioConfig, engine::RunResult>> runs;
  for (const auto& m : micro_runs()) runs.emplace_back(m.config, m.result);
  for (int hops : {1, 2, 3}) {
    auto c = load_config(kConfigDir + "/asymmetric.json");
    c.max_hops = hops;
    c.grid_dims = {2, 3};
    c.mean_rate_scale = 4.0;
    c.horizon_t = 1800;
    apply_defaults(c);
    runs.emplace_back(c, engine::run(c));
  }
  std::size_t requests = 0, incomplete = 0, over = 0;
  for (const auto& [c, r] : runs) {
    const auto t = build_topology(c);
    for (const auto& q : r.requests) {
      ++requests;
      incomplete += q.completed ? 0 : 1;
      // The target itself plus every node within max_hops of it.
      over += (q.responses + q.late_responses <= bfs_size(t, q.target, c.max_hops)) ? 0 : 1;
    }
  }
  return {incomplete == 0 && over == 0 && requests > 0,
          fmt("%zu requests over %zu runs: %zu incomplete, %zu above the BFS bound", requests, runs.size(),
              incomplete, over)};
}

Outcome determinism() {
  auto c = load_config(kConfigDir + "/default.json");
  c.seed = 42;
  apply_defaults(c);
  const auto a = engine::to_json(engine::run(c)).dump(2);
  const auto b = engine::to_json(engine::run(c)).dump(2);

  cli::SweepSpec spec;
  spec.parameter = cli::SweepParameter::kNodes;
  spec.values = {60, 120};
  spec.replications = 3;
  spec.base_config = load_config(kConfigDir + "/asymmetric.json");
  apply_defaults(spec.base_config);
  spec.base_seed = 5;
  auto table = [&](unsigned threads) {
    const auto r = cli::run_sweep(spec, threads);
    std::ostringstream os;
    os << cli::to_json(r).dump(2);
    cli::write_sweep_csv(os, r);
    return os.str();
  };
  const auto one = table(1);
  const auto four = table(4);
  return {a == b && one == four,
          fmt("run reports identical: %s; sweep output with 1 vs 4 threads identical: %s", a == b ? "yes" : "no",
              one == four ? "yes" : "no")};
}

Outcome scale() {
  auto c = load_config(kConfigDir + "/default.json");
  c.n_nodes = 150;
  c.n_providers = 5;
  c.grid_dims = {2, 2};
  c.horizon_t = 7200;
  apply_defaults(c);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = engine::run(c);
  const double took = seconds_since(t0);
  return {r.events.total >= kScaleEvents && took < kScaleBudgetS && !r.violation,
          fmt("%llu events in %.2f s (need >= %llu events, budget %.0f s)",
              static_cast<unsigned long long>(r.events.total), took, static_cast<unsigned long long>(kScaleEvents),
              kScaleBudgetS)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 metric oracle equivalence", metric_oracle},
      {"2 conservation and no double booking", conservation},
      {"3 two-call hand trace", hand_trace},
      {"4 zero-blocking rows give eta_sys = 1", zero_blocking_rows},
      {"5 sharing dominance (paired, sign test)", sharing_dominance},
      {"6 node-count blocking trend", table2_trend},
      {"7 traffic statistics", traffic_statistics},
      {"8 protocol response bounds", protocol_bounds},
      {"9 determinism", determinism},
      {"10 scale", scale},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
