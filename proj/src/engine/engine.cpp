#include "crshare/engine.h"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "crshare/admission.h"
#include "crshare/crnet.h"
#include "crshare/event_queue.h"
#include "crshare/rng.h"
#include "crshare/topology.h"
#include "crshare/traffic.h"

namespace crshare::engine {

namespace {

struct Slot {
  std::vector<CallId> occupants;
  InfraId holder;  // owner's base station unless lent
  bool lent = false;
};

struct InfraState {
  int own_calls = 0;
  std::vector<ChannelId> borrowed;  // in claim order
  std::deque<CallId> pending;
  std::optional<RequestId> outstanding;
};

struct Outstanding {
  InfraId infra;
  std::size_t stat_index = 0;
  std::vector<crnet::AvailabilityResponse> responses;
};

class Simulation final : public crnet::OccupancyView {
 public:
  Simulation(const ScenarioConfig& config, const RunOptions& options);

  RunResult run();

  crnet::ChannelUsage usage(CellId cell, ChannelId channel) const override {
    const Slot& s = slot(cell, channel);
    return {!s.occupants.empty(), s.lent};
  }

 private:
  Slot& slot(CellId cell, ChannelId channel) { return slots_[cell.index() * n_channels_ + channel.index()]; }
  const Slot& slot(CellId cell, ChannelId channel) const {
    return slots_[cell.index() * n_channels_ + channel.index()];
  }
  const Infrastructure& infra(InfraId id) const { return topo_.infrastructures[id.index()]; }

  OwnLoad own_load(InfraId k) const;
  std::optional<ChannelId> own_free_channel(InfraId k) const;

  void on_arrival(const ArrivalEvent& e);
  void on_departure(const DepartureEvent& e);
  void on_sense_tick(const SenseTickEvent& e);
  void on_message(MessageDelivery& e);
  void on_deadline(const AggregateDeadline& e);

  void admit(InfraId k, CallId call);
  bool try_place_local(InfraId k, CallId call);
  void place(InfraId k, CallId call, ChannelId channel, bool borrowed);
  void block(CallId call);
  bool claim(InfraId k, ChannelId channel);
  void issue_request(InfraId k);
  void drain_pending(InfraId k);
  std::vector<ChannelId> release_borrowed_channels(InfraId k);
  void move_call(CallId call, ChannelId to, bool to_borrowed);

  void send(crnet::Message msg);
  void record_message(const crnet::Message& msg);
  void trace(TraceKind kind, ProviderId provider, CellId cell, ChannelId channel, CallId call, double holding);
  std::optional<std::string> check_invariants() const;

  const ScenarioConfig& config_;
  RunOptions options_;
  Topology topo_;
  std::size_t n_channels_ = 0;
  std::vector<crnet::CrNode> nodes_;
  EventQueue queue_;
  metrics::MetricsAccumulator acc_;
  std::vector<double> unit_prices_;

  ArrivalSchedule schedule_;
  std::vector<std::mt19937_64> placement_;

  std::vector<Slot> slots_;
  std::vector<InfraState> infra_;
  std::vector<std::optional<InfraId>> borrower_;  // global, per channel
  std::vector<Call> calls_;
  std::map<RequestId, Outstanding> outstanding_;
  RequestId next_request_ = 1;
  double clock_ = 0.0;
  std::size_t active_calls_ = 0;

  RunResult result_;
};

Simulation::Simulation(const ScenarioConfig& config, const RunOptions& options)
    : config_(config),
      options_(options),
      topo_(build_topology(config)),
      n_channels_(topo_.channels.size()),
      acc_(topo_.channels, static_cast<std::size_t>(config.n_providers), topo_.cells.size(), config.horizon_t),
      unit_prices_(config.unit_price_alpha) {
  const crnet::ProtocolParams params{config.max_hops, config.sensing_period, config.availability_window};
  nodes_.reserve(topo_.nodes.size());
  for (const auto& site : topo_.nodes) nodes_.emplace_back(site, topo_, params);

  result_.seed = config.seed;
  if (config.arrival_schedule) {
    schedule_ = *config.arrival_schedule;
  } else {
    const auto model = traffic::TrafficModel::from_config(config);
    result_.realized_rates = traffic::draw_correlated_rates(model, config.seed);
    schedule_ = traffic::generate_arrivals(result_.realized_rates, config.mean_holding_time, config.horizon_t,
                                           config.seed);
  }
  for (int p = 0; p < config.n_providers; ++p) {
    placement_.push_back(make_stream(config.seed, StreamPurpose::kPlacement, static_cast<std::uint32_t>(p)));
  }

  slots_.resize(topo_.cells.size() * n_channels_);
  for (const auto& cell : topo_.cells) {
    for (const auto& ch : topo_.channels) slot(cell.id, ch.id).holder = topo_.infra_at(cell.id, ch.owner);
  }
  infra_.resize(topo_.infrastructures.size());
  borrower_.resize(n_channels_);
}

OwnLoad Simulation::own_load(InfraId k) const {
  const auto& bs = infra(k);
  OwnLoad load;
  load.calls_on_own = infra_[k.index()].own_calls;
  load.users_per_channel = bs.capacity_users_per_channel;
  for (ChannelId c : topo_.providers[bs.provider.index()].licensed_channels) {
    if (!slot(bs.cell, c).lent) ++load.usable_channels;
  }
  return load;
}

std::optional<ChannelId> Simulation::own_free_channel(InfraId k) const {
  const auto& bs = infra(k);
  for (ChannelId c : topo_.providers[bs.provider.index()].licensed_channels) {
    const Slot& s = slot(bs.cell, c);
    if (!s.lent && static_cast<int>(s.occupants.size()) < bs.capacity_users_per_channel) return c;
  }
  return std::nullopt;
}

RunResult Simulation::run() {
  for (const auto& node : topo_.nodes) queue_.push(0.0, SenseTickEvent{node.id, 0});
  for (std::size_t p = 0; p < schedule_.per_provider.size(); ++p) {
    if (!schedule_.per_provider[p].empty()) {
      queue_.push(schedule_.per_provider[p].front().time, ArrivalEvent{ProviderId(p), 0});
    }
  }

  std::uint64_t index = 0;
  while (!queue_.empty()) {
    Event e = queue_.pop();
    if (e.time < clock_) {
      result_.violation = InvariantViolation{index, e.time, "event scheduled before the current clock"};
      break;
    }
    clock_ = e.time;
    ++result_.events.total;
    std::visit(
        [this](auto& kind) {
          using T = std::decay_t<decltype(kind)>;
          if constexpr (std::is_same_v<T, ArrivalEvent>) {
            ++result_.events.arrivals;
            on_arrival(kind);
          } else if constexpr (std::is_same_v<T, DepartureEvent>) {
            ++result_.events.departures;
            on_departure(kind);
          } else if constexpr (std::is_same_v<T, SenseTickEvent>) {
            ++result_.events.sense_ticks;
            on_sense_tick(kind);
          } else if constexpr (std::is_same_v<T, MessageDelivery>) {
            ++result_.events.messages;
            on_message(kind);
          } else {
            ++result_.events.deadlines;
            on_deadline(kind);
          }
        },
        e.kind);
    if (config_.check_invariants) {
      if (auto bad = check_invariants()) {
        result_.violation = InvariantViolation{index, e.time, *bad};
        break;
      }
    }
    ++index;
  }

  if (!result_.violation) {
    for (const auto& call : calls_) {
      if (call.outcome == CallOutcome::kPending) {
        result_.violation = InvariantViolation{index, clock_, "call " + std::to_string(call.id) + " never resolved"};
        break;
      }
    }
  }

  acc_.finish();
  result_.report = metrics::build_report(acc_, unit_prices_, config_.cost_efficiency_mode);
  result_.peak_queue_size = queue_.peak_size();
  if (options_.record_trace) result_.calls = std::move(calls_);
  return std::move(result_);
}

void Simulation::on_arrival(const ArrivalEvent& e) {
  const auto& list = schedule_.per_provider[e.provider.index()];
  const ArrivalRecord rec = list[e.index];
  if (e.index + 1 < list.size()) queue_.push(list[e.index + 1].time, ArrivalEvent{e.provider, e.index + 1});

  Call call;
  call.id = calls_.size();
  call.subscriber_provider = e.provider;
  call.arrival_time = rec.time;
  call.holding_time = rec.holding;
  if (topo_.cells.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, topo_.cells.size() - 1);
    call.cell = CellId(pick(placement_[e.provider.index()]));
  } else {
    call.cell = CellId(0);
  }
  calls_.push_back(call);

  acc_.record_offered(e.provider, rec.holding);
  trace(TraceKind::kArrival, e.provider, call.cell, ChannelId{}, call.id, rec.holding);

  const InfraId k = topo_.infra_at(call.cell, e.provider);
  if (!infra_[k.index()].pending.empty()) {
    infra_[k.index()].pending.push_back(call.id);
    return;
  }
  admit(k, call.id);
}

void Simulation::admit(InfraId k, CallId call) {
  if (try_place_local(k, call)) return;
  if (config_.provider_shares(infra(k).provider.index())) {
    infra_[k.index()].pending.push_back(call);
    issue_request(k);
  } else {
    block(call);
  }
}

bool Simulation::try_place_local(InfraId k, CallId call) {
  if (!detect_overload(own_load(k))) {
    place(k, call, *own_free_channel(k), false);
    return true;
  }
  const auto& bs = infra(k);
  for (ChannelId c : infra_[k.index()].borrowed) {
    if (static_cast<int>(slot(bs.cell, c).occupants.size()) < bs.capacity_users_per_channel) {
      place(k, call, c, true);
      return true;
    }
  }
  return false;
}

void Simulation::place(InfraId k, CallId id, ChannelId channel, bool borrowed) {
  const auto& bs = infra(k);
  Call& call = calls_[id];
  Slot& s = slot(bs.cell, channel);
  s.occupants.push_back(id);
  if (s.occupants.size() == 1) acc_.set_channel_user(clock_, bs.cell, channel, bs.provider);
  if (!borrowed) ++infra_[k.index()].own_calls;

  call.assigned_channel = channel;
  call.on_borrowed_channel = borrowed;
  call.outcome = CallOutcome::kAccepted;
  call.accept_time = clock_;
  acc_.record_accepted(bs.provider, call.holding_time, unit_prices_[bs.provider.index()]);
  ++active_calls_;
  result_.active_users_peak = std::max(result_.active_users_peak, active_calls_);

  const double leave = clock_ + call.holding_time;
  if (leave <= config_.horizon_t) queue_.push(leave, DepartureEvent{id});
  trace(TraceKind::kAccept, bs.provider, bs.cell, channel, id, call.holding_time);
}

void Simulation::block(CallId id) {
  Call& call = calls_[id];
  call.outcome = CallOutcome::kBlocked;
  acc_.record_blocked(call.subscriber_provider);
  trace(TraceKind::kBlock, call.subscriber_provider, call.cell, ChannelId{}, id, call.holding_time);
}

void Simulation::on_departure(const DepartureEvent& e) {
  Call& call = calls_[e.call];
  const ChannelId channel = *call.assigned_channel;
  const InfraId k = topo_.infra_at(call.cell, call.subscriber_provider);
  Slot& s = slot(call.cell, channel);
  s.occupants.erase(std::find(s.occupants.begin(), s.occupants.end(), call.id));
  if (s.occupants.empty()) acc_.set_channel_user(clock_, call.cell, channel, std::nullopt);
  if (!call.on_borrowed_channel) --infra_[k.index()].own_calls;
  --active_calls_;
  trace(TraceKind::kDeparture, call.subscriber_provider, call.cell, channel, call.id, call.holding_time);

  release_borrowed_channels(k);
}

void Simulation::move_call(CallId id, ChannelId to, bool to_borrowed) {
  Call& call = calls_[id];
  const InfraId k = topo_.infra_at(call.cell, call.subscriber_provider);
  Slot& from = slot(call.cell, *call.assigned_channel);
  from.occupants.erase(std::find(from.occupants.begin(), from.occupants.end(), id));
  if (from.occupants.empty()) acc_.set_channel_user(clock_, call.cell, *call.assigned_channel, std::nullopt);
  if (!call.on_borrowed_channel) --infra_[k.index()].own_calls;

  Slot& dest = slot(call.cell, to);
  dest.occupants.push_back(id);
  if (dest.occupants.size() == 1) acc_.set_channel_user(clock_, call.cell, to, call.subscriber_provider);
  if (!to_borrowed) ++infra_[k.index()].own_calls;
  call.assigned_channel = to;
  call.on_borrowed_channel = to_borrowed;
  trace(TraceKind::kMigrate, call.subscriber_provider, call.cell, to, id, call.holding_time);
  ++result_.protocol.migrations;
}

std::vector<ChannelId> Simulation::release_borrowed_channels(InfraId k) {
  auto& state = infra_[k.index()];
  if (state.borrowed.empty()) return {};
  const auto& bs = infra(k);

  std::vector<BorrowedLoad> loads;
  for (ChannelId c : state.borrowed) {
    loads.push_back({c, static_cast<int>(slot(bs.cell, c).occupants.size())});
  }
  const auto plan = plan_release(own_load(k).free_slots(), loads);
  for (ChannelId c : plan) {
    const std::vector<CallId> moving = slot(bs.cell, c).occupants;
    for (CallId id : moving) move_call(id, *own_free_channel(k), false);

    Slot& s = slot(bs.cell, c);
    s.lent = false;
    s.holder = topo_.infra_at(bs.cell, topo_.channels[c.index()].owner);
    borrower_[c.index()].reset();
    state.borrowed.erase(std::find(state.borrowed.begin(), state.borrowed.end(), c));
    trace(TraceKind::kRelease, bs.provider, bs.cell, c, 0, 0.0);
    ++result_.protocol.releases;
  }
  return plan;
}

bool Simulation::claim(InfraId k, ChannelId c) {
  const auto& bs = infra(k);
  const Channel& ch = topo_.channels[c.index()];
  Slot& s = slot(bs.cell, c);
  if (ch.owner == bs.provider || !topo_.providers[ch.owner.index()].shares) return false;
  if (borrower_[c.index()] || s.lent || !s.occupants.empty()) return false;

  s.lent = true;
  s.holder = k;
  borrower_[c.index()] = k;
  infra_[k.index()].borrowed.push_back(c);
  trace(TraceKind::kBorrow, bs.provider, bs.cell, c, 0, 0.0);
  ++result_.protocol.borrows;
  return true;
}

void Simulation::issue_request(InfraId k) {
  const RequestId id = next_request_++;
  const auto& bs = infra(k);

  crnet::ChannelRequest req;
  req.request_id = id;
  req.origin_infrastructure = k;
  req.provider = bs.provider;
  req.target = topo_.request_target(k);
  req.issue_time = clock_;

  RequestStat stat;
  stat.id = id;
  stat.origin = k;
  stat.target = req.target;
  stat.issue_time = clock_;
  result_.requests.push_back(stat);
  ++result_.protocol.requests;

  outstanding_[id] = Outstanding{k, result_.requests.size() - 1, {}};
  infra_[k.index()].outstanding = id;
  send(req);

  // Last direct response from a node max_hops away arrives after
  // (max_hops + 2) message delays; the extra half delay keeps it inside.
  const double window = (config_.max_hops + 2.5) * config_.message_delay;
  queue_.push(clock_ + window, AggregateDeadline{id});
}

void Simulation::send(crnet::Message msg) { queue_.push(clock_ + config_.message_delay, MessageDelivery{std::move(msg)}); }

void Simulation::on_sense_tick(const SenseTickEvent& e) {
  nodes_[e.node.index()].sense(*this, clock_);
  const double next = static_cast<double>(e.tick + 1) * config_.sensing_period;
  if (next <= config_.horizon_t) queue_.push(next, SenseTickEvent{e.node, e.tick + 1});
}

void Simulation::on_message(MessageDelivery& e) {
  record_message(e.message);
  if (auto* req = std::get_if<crnet::ChannelRequest>(&e.message)) {
    auto out = nodes_[req->target.index()].handle_request(*req, *this, clock_);
    send(std::move(out.response));
    for (auto& q : out.forwards) send(std::move(q));
  } else if (auto* q = std::get_if<crnet::BroadcastQuery>(&e.message)) {
    auto out = nodes_[q->target.index()].handle_broadcast(*q, *this, clock_);
    if (out.response) send(std::move(*out.response));
    for (auto& f : out.forwards) send(std::move(f));
  } else {
    auto& resp = std::get<crnet::AvailabilityResponse>(e.message);
    auto it = outstanding_.find(resp.request_id);
    if (it == outstanding_.end()) {
      ++result_.protocol.late_responses;
      for (auto& stat : result_.requests) {
        if (stat.id == resp.request_id) ++stat.late_responses;
      }
      return;
    }
    ++result_.protocol.responses;
    ++result_.requests[it->second.stat_index].responses;
    it->second.responses.push_back(std::move(resp));
  }
}

void Simulation::on_deadline(const AggregateDeadline& e) {
  auto node = outstanding_.extract(e.request);
  if (node.empty()) return;
  Outstanding& o = node.mapped();
  RequestStat& stat = result_.requests[o.stat_index];
  stat.completed = true;
  ++result_.protocol.completed;
  result_.protocol.max_responses_per_request =
      std::max<std::uint64_t>(result_.protocol.max_responses_per_request, stat.responses);

  auto candidates = crnet::aggregate_responses(o.responses);
  stat.candidates = candidates.size();

  const InfraId k = o.infra;
  auto& state = infra_[k.index()];
  state.outstanding.reset();
  const CallId head = state.pending.front();
  state.pending.pop_front();

  bool placed = try_place_local(k, head);
  auto frequency_of = [this](ChannelId c) { return topo_.channels[c.index()].center_frequency_mhz; };
  // First-come first-served at claim time: one retry on a lost claim.
  for (int attempt = 0; !placed && attempt < 2; ++attempt) {
    const auto pick = select_channel(std::span<const crnet::AvailabilityEntry>(candidates), frequency_of);
    if (!pick) break;
    if (claim(k, *pick)) {
      place(k, head, *pick, true);
      placed = true;
      stat.channel_found = true;
    } else {
      ++result_.protocol.claim_conflicts;
      std::erase_if(candidates, [&](const crnet::AvailabilityEntry& c) { return c.channel == *pick; });
    }
  }
  if (!placed) block(head);
  drain_pending(k);
}

void Simulation::drain_pending(InfraId k) {
  auto& state = infra_[k.index()];
  while (!state.pending.empty()) {
    if (!try_place_local(k, state.pending.front())) {
      issue_request(k);
      return;
    }
    state.pending.pop_front();
  }
}

void Simulation::record_message(const crnet::Message& msg) {
  if (!options_.record_messages) return;
  MessageRecord r;
  r.time = clock_;
  if (const auto* req = std::get_if<crnet::ChannelRequest>(&msg)) {
    r.msg_type = "request";
    r.src_kind = Endpoint::kInfrastructure;
    r.src = req->origin_infrastructure.value;
    r.dst_kind = Endpoint::kNode;
    r.dst = req->target.value;
    r.request_id = req->request_id;
  } else if (const auto* q = std::get_if<crnet::BroadcastQuery>(&msg)) {
    r.msg_type = "broadcast";
    r.src = q->sender.value;
    r.dst = q->target.value;
    r.request_id = q->request_id;
  } else {
    const auto& resp = std::get<crnet::AvailabilityResponse>(msg);
    r.msg_type = "response";
    r.src = resp.origin_node.value;
    r.dst_kind = Endpoint::kInfrastructure;
    r.dst = resp.origin_infrastructure.value;
    r.request_id = resp.request_id;
    r.entry_count = resp.entries.size();
  }
  result_.messages.push_back(std::move(r));
}

void Simulation::trace(TraceKind kind, ProviderId provider, CellId cell, ChannelId channel, CallId call,
                       double holding) {
  if (!options_.record_trace) return;
  result_.trace.push_back(TraceRecord{clock_, kind, provider, cell, channel, call, holding});
}

std::optional<std::string> Simulation::check_invariants() const {
  std::vector<int> lent_count(n_channels_, 0);
  for (const auto& cell : topo_.cells) {
    for (const auto& ch : topo_.channels) {
      const Slot& s = slot(cell.id, ch.id);
      const auto& holder = infra(s.holder);
      if (static_cast<int>(s.occupants.size()) > holder.capacity_users_per_channel) {
        std::ostringstream os;
        os << "channel " << ch.id << " in cell " << cell.id << " hosts " << s.occupants.size() << " calls";
        return os.str();
      }
      if (s.lent) {
        ++lent_count[ch.id.index()];
        if (holder.provider == ch.owner || borrower_[ch.id.index()] != s.holder) {
          return "borrowed channel " + std::to_string(ch.id.value) + " has inconsistent holder";
        }
      } else if (holder.provider != ch.owner) {
        return "channel " + std::to_string(ch.id.value) + " held by a non-owner without being lent";
      }
      for (CallId id : s.occupants) {
        const Call& call = calls_[id];
        if (call.cell != cell.id || call.subscriber_provider != holder.provider || call.assigned_channel != ch.id) {
          return "call " + std::to_string(id) + " is misfiled on channel " + std::to_string(ch.id.value);
        }
      }
    }
  }
  for (std::size_t c = 0; c < n_channels_; ++c) {
    if (lent_count[c] != (borrower_[c] ? 1 : 0)) {
      return "channel " + std::to_string(c) + " borrowed by more than one base station";
    }
  }
  for (const auto& bs : topo_.infrastructures) {
    const OwnLoad load = own_load(bs.id);
    int counted = 0;
    for (ChannelId c : topo_.providers[bs.provider.index()].licensed_channels) {
      const Slot& s = slot(bs.cell, c);
      if (!s.lent) counted += static_cast<int>(s.occupants.size());
    }
    if (counted != load.calls_on_own || load.calls_on_own > load.capacity()) {
      return "base station " + std::to_string(bs.id.value) + " own-channel load inconsistent";
    }
  }
  return std::nullopt;
}

}  // namespace

RunResult run(const ScenarioConfig& config, const RunOptions& options) {
  validate(config);
  Simulation sim(config, options);
  return sim.run();
}

}  // namespace crshare::engine
