#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crshare/config.h"
#include "crshare/ids.h"
#include "crshare/metrics.h"

namespace crshare::engine {

enum class CallOutcome { kPending, kAccepted, kBlocked };

struct Call {
  CallId id = 0;
  ProviderId subscriber_provider;
  CellId cell;
  double arrival_time = 0.0;
  double holding_time = 0.0;
  double accept_time = 0.0;
  std::optional<ChannelId> assigned_channel;
  bool on_borrowed_channel = false;
  CallOutcome outcome = CallOutcome::kPending;
};

enum class TraceKind { kArrival, kAccept, kBlock, kDeparture, kBorrow, kRelease, kMigrate };

// One row of the event trace. `channel` is invalid where not applicable.
struct TraceRecord {
  double time = 0.0;
  TraceKind kind = TraceKind::kArrival;
  ProviderId provider;
  CellId cell;
  ChannelId channel;
  CallId call = 0;
  double holding = 0.0;
};

enum class Endpoint { kInfrastructure, kNode };

struct MessageRecord {
  double time = 0.0;  // delivery time
  std::string msg_type;
  Endpoint src_kind = Endpoint::kNode;
  std::uint32_t src = 0;
  Endpoint dst_kind = Endpoint::kNode;
  std::uint32_t dst = 0;
  RequestId request_id = 0;
  std::size_t entry_count = 0;
};

struct RequestStat {
  RequestId id = 0;
  InfraId origin;
  NodeId target;
  double issue_time = 0.0;
  std::size_t responses = 0;
  std::size_t late_responses = 0;
  std::size_t candidates = 0;
  bool completed = false;
  bool channel_found = false;
};

struct EventCounts {
  std::uint64_t total = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  std::uint64_t sense_ticks = 0;
  std::uint64_t messages = 0;
  std::uint64_t deadlines = 0;
};

struct ProtocolSummary {
  std::uint64_t requests = 0;
  std::uint64_t completed = 0;
  std::uint64_t responses = 0;
  std::uint64_t late_responses = 0;
  std::uint64_t max_responses_per_request = 0;
  std::uint64_t borrows = 0;
  std::uint64_t releases = 0;
  std::uint64_t migrations = 0;
  std::uint64_t claim_conflicts = 0;
};

struct InvariantViolation {
  std::uint64_t event_index = 0;  // position in processing order
  double time = 0.0;
  std::string message;
};

struct RunOptions {
  bool record_trace = false;     // trace rows and the call log
  bool record_messages = false;  // protocol message log
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<double> realized_rates;
  metrics::MetricReport report;
  EventCounts events;
  std::size_t peak_queue_size = 0;
  std::size_t active_users_peak = 0;
  ProtocolSummary protocol;
  std::vector<RequestStat> requests;
  std::optional<InvariantViolation> violation;

  std::vector<Call> calls;  // with record_trace
  std::vector<TraceRecord> trace;
  std::vector<MessageRecord> messages;
};

// Runs one replication to the horizon. Config errors throw ConfigError;
// invariant violations are reported in RunResult::violation.
RunResult run(const ScenarioConfig& config, const RunOptions& options = {});

std::string to_string(TraceKind kind);
std::string to_string(CallOutcome outcome);

nlohmann::ordered_json to_json(const RunResult& result);
void write_trace_csv(std::ostream& os, const RunResult& result);
void write_message_csv(std::ostream& os, const RunResult& result);

}  // namespace crshare::engine
