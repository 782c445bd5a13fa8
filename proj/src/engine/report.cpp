#include <ostream>

#include "crshare/engine.h"

namespace crshare::engine {

std::string to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::kArrival: return "arrival";
    case TraceKind::kAccept: return "accept";
    case TraceKind::kBlock: return "block";
    case TraceKind::kDeparture: return "departure";
    case TraceKind::kBorrow: return "borrow";
    case TraceKind::kRelease: return "release";
    case TraceKind::kMigrate: return "migrate";
  }
  return "unknown";
}

std::string to_string(CallOutcome outcome) {
  switch (outcome) {
    case CallOutcome::kPending: return "pending";
    case CallOutcome::kAccepted: return "accepted";
    case CallOutcome::kBlocked: return "blocked";
  }
  return "unknown";
}

nlohmann::ordered_json to_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["realized_rates"] = r.realized_rates;
  j["metrics"] = metrics::to_json(r.report);
  j["active_users_peak"] = r.active_users_peak;
  j["events"] = {{"total", r.events.total},         {"arrivals", r.events.arrivals},
                 {"departures", r.events.departures}, {"sense_ticks", r.events.sense_ticks},
                 {"messages", r.events.messages},     {"deadlines", r.events.deadlines},
                 {"peak_queue_size", r.peak_queue_size}};
  const auto& p = r.protocol;
  j["protocol"] = {{"requests", p.requests},
                   {"completed", p.completed},
                   {"responses", p.responses},
                   {"late_responses", p.late_responses},
                   {"max_responses_per_request", p.max_responses_per_request},
                   {"borrows", p.borrows},
                   {"releases", p.releases},
                   {"migrations", p.migrations},
                   {"claim_conflicts", p.claim_conflicts}};
  if (r.violation) {
    j["invariant_violation"] = {
        {"event_index", r.violation->event_index}, {"time", r.violation->time}, {"message", r.violation->message}};
  } else {
    j["invariant_violation"] = nullptr;
  }
  return j;
}

namespace {

std::string outcome_of(const RunResult& r, const TraceRecord& t) {
  if (t.kind != TraceKind::kArrival && t.kind != TraceKind::kAccept && t.kind != TraceKind::kBlock &&
      t.kind != TraceKind::kDeparture) {
    return "";
  }
  if (t.call < r.calls.size()) return to_string(r.calls[t.call].outcome);
  return "";
}

const char* endpoint_name(Endpoint e) { return e == Endpoint::kInfrastructure ? "infrastructure" : "node"; }

}  // namespace

void write_trace_csv(std::ostream& os, const RunResult& r) {
  os << "time,kind,provider,cell,channel,outcome,call,holding\n";
  os.precision(10);
  for (const auto& t : r.trace) {
    const bool has_call = t.kind != TraceKind::kBorrow && t.kind != TraceKind::kRelease;
    os << t.time << ',' << to_string(t.kind) << ',' << t.provider.value + 1 << ',' << t.cell.value << ',';
    if (t.channel.valid()) os << t.channel.value;
    os << ',' << outcome_of(r, t) << ',';
    if (has_call) os << t.call;
    os << ',';
    if (has_call) os << t.holding;
    os << '\n';
  }
}

void write_message_csv(std::ostream& os, const RunResult& r) {
  os << "time,msg_type,src_kind,src,dst_kind,dst,request_id,entries\n";
  os.precision(10);
  for (const auto& m : r.messages) {
    os << m.time << ',' << m.msg_type << ',' << endpoint_name(m.src_kind) << ',' << m.src << ','
       << endpoint_name(m.dst_kind) << ',' << m.dst << ',' << m.request_id << ',' << m.entry_count << '\n';
  }
}

}  // namespace crshare::engine
