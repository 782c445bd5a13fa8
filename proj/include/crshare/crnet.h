#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <variant>
#include <vector>

#include "crshare/ids.h"
#include "crshare/topology.h"

namespace crshare::crnet {

struct AvailabilityEntry {
  ChannelId channel;
  double availability_probability = 0.0;
  double interference_level = 0.0;
  double cost = 0.0;
  NodeId reporting_node;

  friend bool operator==(const AvailabilityEntry&, const AvailabilityEntry&) = default;
};

struct ChannelRequest {
  RequestId request_id = 0;
  InfraId origin_infrastructure;
  ProviderId provider;
  NodeId target;
  double issue_time = 0.0;
};

struct BroadcastQuery {
  RequestId request_id = 0;
  InfraId origin_infrastructure;
  ProviderId provider;
  NodeId origin_node;  // node that received the ChannelRequest
  NodeId sender;
  NodeId target;
  double issue_time = 0.0;
  int hop_count = 1;
};

// Sent by every answering node straight to the requesting infrastructure.
struct AvailabilityResponse {
  RequestId request_id = 0;
  InfraId origin_infrastructure;
  NodeId origin_node;  // the responder
  double issue_time = 0.0;
  std::vector<AvailabilityEntry> entries;
};

using Message = std::variant<ChannelRequest, BroadcastQuery, AvailabilityResponse>;

// Ground-truth usage of one channel in one cell.
struct ChannelUsage {
  bool busy = false;      // at least one call on it
  bool borrowed = false;  // held by a non-owner infrastructure
};

class OccupancyView {
 public:
  virtual ~OccupancyView() = default;
  virtual ChannelUsage usage(CellId cell, ChannelId channel) const = 0;
};

struct ProtocolParams {
  int max_hops = 1;
  double sensing_period = 1.0;
  int availability_window = 10;
};

struct RequestOutcome {
  AvailabilityResponse response;
  std::vector<BroadcastQuery> forwards;
};

struct BroadcastOutcome {
  std::optional<AvailabilityResponse> response;
  std::vector<BroadcastQuery> forwards;
};

// Per-channel sensing state: last observed usage plus a sliding window of
// idle/busy samples used to estimate availability probability.
class SensedChannel {
 public:
  SensedChannel(ChannelId id, int window) : id_(id), samples_(static_cast<std::size_t>(window), 0) {}

  ChannelId id() const { return id_; }
  const ChannelUsage& usage() const { return usage_; }
  bool idle() const { return !usage_.busy && !usage_.borrowed; }

  void record(ChannelUsage usage);
  std::size_t sample_count() const { return count_; }
  // Idle fraction over the window; `prior` when no sample exists yet.
  double availability(double prior) const;

 private:
  ChannelId id_;
  ChannelUsage usage_;
  std::vector<std::uint8_t> samples_;
  std::size_t next_ = 0;
  std::size_t count_ = 0;
  std::size_t idle_count_ = 0;
};

class CrNode {
 public:
  CrNode(const CrNodeSite& site, const Topology& topology, ProtocolParams params);

  NodeId id() const { return site_->id; }
  const CrNodeSite& site() const { return *site_; }
  double last_sense_time() const { return last_sense_time_; }
  bool has_sensed() const { return sensed_; }
  std::span<const SensedChannel> occupancy_map() const { return map_; }
  const SensedChannel* find(ChannelId channel) const;

  // Omniscient sensing: the map takes the true state of every mapped channel
  // over all cells in range.
  void sense(const OccupancyView& world, double now);

  RequestOutcome handle_request(const ChannelRequest& req, const OccupancyView& world, double now);
  BroadcastOutcome handle_broadcast(const BroadcastQuery& query, const OccupancyView& world, double now);

  // Entries this node would report to `requester`: idle, foreign,
  // not borrowed, and owned by a provider that lends.
  std::vector<AvailabilityEntry> eligible_entries(ProviderId requester) const;

 private:
  void refresh_if_stale(const OccupancyView& world, double now);
  std::vector<BroadcastQuery> forwards_for(const BroadcastQuery& proto, NodeId except) const;

  const CrNodeSite* site_;
  const Topology* topology_;
  ProtocolParams params_;
  std::vector<SensedChannel> map_;  // ascending channel id
  double last_sense_time_ = 0.0;
  bool sensed_ = false;
  std::unordered_set<RequestId> seen_;
};

// Union keyed by channel id. On duplicates the entry with the higher
// interference level wins, then the lower availability, then the lower
// reporting node id. Output is sorted by channel id.
std::vector<AvailabilityEntry> aggregate_responses(std::span<const AvailabilityResponse> responses);

}  // namespace crshare::crnet
