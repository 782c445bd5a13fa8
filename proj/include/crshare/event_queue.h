#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "crshare/crnet.h"
#include "crshare/ids.h"

namespace crshare::engine {

struct ArrivalEvent {
  ProviderId provider;
  std::size_t index = 0;  // position in the provider's arrival list
};

struct DepartureEvent {
  CallId call = 0;
};

struct SenseTickEvent {
  NodeId node;
  std::uint64_t tick = 0;
};

struct MessageDelivery {
  crnet::Message message;
};

struct AggregateDeadline {
  RequestId request = 0;
};

using EventKind = std::variant<ArrivalEvent, DepartureEvent, SenseTickEvent, MessageDelivery, AggregateDeadline>;

struct Event {
  double time = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind;
};

// Min-heap on (time, sequence). Sequence numbers are unique and increase
// with insertion order, so simultaneous events pop first-in first-out.
class EventQueue {
 public:
  std::uint64_t push(double time, EventKind kind) {
    const std::uint64_t seq = next_sequence_++;
    heap_.push_back(Event{time, seq, std::move(kind)});
    std::push_heap(heap_.begin(), heap_.end(), later);
    peak_ = std::max(peak_, heap_.size());
    return seq;
  }

  Event pop() {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    Event e = std::move(heap_.back());
    heap_.pop_back();
    return e;
  }

  const Event& top() const { return heap_.front(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  std::size_t peak_size() const { return peak_; }

 private:
  static bool later(const Event& a, const Event& b) {
    if (a.time != b.time) return a.time > b.time;
    return a.sequence > b.sequence;
  }

  std::vector<Event> heap_;
  std::uint64_t next_sequence_ = 0;
  std::size_t peak_ = 0;
};

}  // namespace crshare::engine
