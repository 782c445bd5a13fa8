// crshare: run, sweep and compare spectrum-sharing scenarios.
//
// Exit codes: 0 success, 1 invalid input, 2 invariant violation at runtime.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "crshare/cli.h"
#include "crshare/config.h"
#include "crshare/engine.h"

namespace {

using namespace crshare;

constexpr int kExitInvalid = 1;
constexpr int kExitViolation = 2;

// Writes to `path`, or stdout when empty.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("out", "cannot open '" + path + "' for writing");
  write(out);
}

void write_report_csv(std::ostream& os, const engine::RunResult& r) {
  os << "provider,seed,processed_calls,accepted_calls,blocked_calls,R_BL,eta_sys,eta_s,c_e,"
        "interference_mhz,offered_erlang,carried_erlang\n";
  os.precision(12);
  auto row = [&](const std::string& name, const metrics::ProviderReport& p) {
    os << name << ',' << r.seed << ',' << p.processed_calls << ',' << p.accepted_calls << ',' << p.blocked_calls
       << ',' << p.R_BL << ',' << p.eta_sys << ',' << p.eta_s << ',' << p.c_e << ',' << p.interference_mhz << ','
       << p.offered_erlang << ',' << p.carried_erlang << '\n';
  };
  for (const auto& p : r.report.providers) row(std::to_string(p.provider), p);
  row("all", r.report.aggregate);
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string trace;
  std::string messages;
  std::string format = "json";
};

int cmd_run(const RunArgs& a) {
  ScenarioConfig config = load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  apply_defaults(config);

  engine::RunOptions options;
  options.record_trace = !a.trace.empty();
  options.record_messages = !a.messages.empty();
  const auto result = engine::run(config, options);

  emit(a.out, [&](std::ostream& os) {
    if (a.format == "csv") {
      write_report_csv(os, result);
    } else {
      os << engine::to_json(result).dump(2) << '\n';
    }
  });
  if (!a.trace.empty()) emit(a.trace, [&](std::ostream& os) { engine::write_trace_csv(os, result); });
  if (!a.messages.empty()) emit(a.messages, [&](std::ostream& os) { engine::write_message_csv(os, result); });

  if (result.violation) {
    std::cerr << "invariant violation at event " << result.violation->event_index << " (t="
              << result.violation->time << "): " << result.violation->message << '\n';
    return kExitViolation;
  }
  return 0;
}

struct SweepArgs {
  std::string spec;
  std::string out;
  unsigned threads = 0;
  std::string format = "csv";
};

int cmd_sweep(const SweepArgs& a) {
  const auto spec = cli::load_sweep_spec(a.spec);
  const auto result = cli::run_sweep(spec, a.threads == 0 ? cli::default_threads() : a.threads);

  if (a.format == "json") {
    emit(a.out, [&](std::ostream& os) { os << cli::to_json(result).dump(2) << '\n'; });
  } else {
    emit(a.out, [&](std::ostream& os) { cli::write_sweep_csv(os, result); });
    std::filesystem::path summary = a.out;
    summary.replace_filename(summary.stem().string() + "_summary.csv");
    emit(summary.string(), [&](std::ostream& os) { cli::write_summary_csv(os, result); });
  }
  if (result.has_violation()) {
    std::cerr << "invariant violation in at least one sweep run\n";
    return kExitViolation;
  }
  return 0;
}

struct CompareArgs {
  std::string config;
  int reps = 30;
  std::string out;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
};

int cmd_compare(const CompareArgs& a) {
  ScenarioConfig config = load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  const auto result = cli::run_compare(config, a.reps, a.threads == 0 ? cli::default_threads() : a.threads);
  emit(a.out, [&](std::ostream& os) { os << cli::to_json(result).dump(2) << '\n'; });
  if (result.has_violation()) {
    std::cerr << "invariant violation in at least one replication\n";
    return kExitViolation;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-provider spectrum sharing simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one scenario and write its metric report");
  run->add_option("--config", run_args.config, "Scenario config (JSON)")->required();
  run->add_option("--seed", run_args.seed, "Override the config seed");
  run->add_option("--out", run_args.out, "Report path (stdout when omitted)");
  run->add_option("--trace", run_args.trace, "Write the event trace as CSV");
  run->add_option("--messages", run_args.messages, "Write the protocol message log as CSV");
  run->add_option("--format", run_args.format, "Report format")->check(CLI::IsMember({"json", "csv"}));

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep over provider groups and replications");
  sweep->add_option("--spec", sweep_args.spec, "Sweep spec (JSON)")->required();
  sweep->add_option("--out", sweep_args.out, "Output table")->required();
  sweep->add_option("--threads", sweep_args.threads, "Worker threads (0 = all cores)");
  sweep->add_option("--format", sweep_args.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Paired sharing-on/off replications");
  compare->add_option("--config", compare_args.config, "Scenario config (JSON)")->required();
  compare->add_option("--reps", compare_args.reps, "Replications")->required()->check(CLI::PositiveNumber);
  compare->add_option("--out", compare_args.out, "Report path (stdout when omitted)");
  compare->add_option("--seed", compare_args.seed, "Override the config seed");
  compare->add_option("--threads", compare_args.threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*sweep) return cmd_sweep(sweep_args);
    return cmd_compare(compare_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}
