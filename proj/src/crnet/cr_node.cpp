#include <algorithm>
#include <map>
#include <set>

#include "crshare/crnet.h"

namespace crshare::crnet {

void SensedChannel::record(ChannelUsage usage) {
  usage_ = usage;
  const std::uint8_t idle = (!usage.busy && !usage.borrowed) ? 1 : 0;
  if (count_ == samples_.size()) {
    idle_count_ -= samples_[next_];
  } else {
    ++count_;
  }
  samples_[next_] = idle;
  idle_count_ += idle;
  next_ = (next_ + 1) % samples_.size();
}

double SensedChannel::availability(double prior) const {
  if (count_ == 0) return prior;
  return static_cast<double>(idle_count_) / static_cast<double>(count_);
}

CrNode::CrNode(const CrNodeSite& site, const Topology& topology, ProtocolParams params)
    : site_(&site), topology_(&topology), params_(params) {
  std::set<ChannelId> mapped;
  for (InfraId infra : site.infrastructures_in_range) {
    const auto& sp = topology.providers[topology.infrastructures[infra.index()].provider.index()];
    mapped.insert(sp.licensed_channels.begin(), sp.licensed_channels.end());
  }
  map_.reserve(mapped.size());
  for (ChannelId c : mapped) map_.emplace_back(c, params.availability_window);
}

const SensedChannel* CrNode::find(ChannelId channel) const {
  auto it = std::lower_bound(map_.begin(), map_.end(), channel,
                             [](const SensedChannel& s, ChannelId c) { return s.id() < c; });
  return (it != map_.end() && it->id() == channel) ? &*it : nullptr;
}

void CrNode::sense(const OccupancyView& world, double now) {
  for (auto& entry : map_) {
    ChannelUsage merged;
    for (CellId cell : site_->cells_in_range) {
      const ChannelUsage u = world.usage(cell, entry.id());
      merged.busy = merged.busy || u.busy;
      merged.borrowed = merged.borrowed || u.borrowed;
    }
    entry.record(merged);
  }
  last_sense_time_ = now;
  sensed_ = true;
}

void CrNode::refresh_if_stale(const OccupancyView& world, double now) {
  if (!sensed_ || now - last_sense_time_ > 2.0 * params_.sensing_period) sense(world, now);
}

std::vector<AvailabilityEntry> CrNode::eligible_entries(ProviderId requester) const {
  std::vector<AvailabilityEntry> out;
  for (std::size_t i = 0; i < map_.size(); ++i) {
    const auto& sensed = map_[i];
    const Channel& ch = topology_->channels[sensed.id().index()];
    if (!sensed.idle() || ch.owner == requester) continue;
    if (!topology_->providers[ch.owner.index()].shares) continue;

    // Busy neighbours in frequency raise the locally observed interference.
    int adjacent_busy = 0;
    if (i > 0 && map_[i - 1].usage().busy && map_[i - 1].id().index() + 1 == sensed.id().index()) ++adjacent_busy;
    if (i + 1 < map_.size() && map_[i + 1].usage().busy && map_[i + 1].id().index() == sensed.id().index() + 1) {
      ++adjacent_busy;
    }

    AvailabilityEntry e;
    e.channel = ch.id;
    e.availability_probability = sensed.availability(ch.availability_probability);
    e.interference_level = ch.interference_level + adjacent_busy;
    e.cost = ch.cost;
    e.reporting_node = id();
    out.push_back(e);
  }
  return out;
}

std::vector<BroadcastQuery> CrNode::forwards_for(const BroadcastQuery& proto, NodeId except) const {
  std::vector<BroadcastQuery> out;
  for (NodeId n : site_->neighbors) {
    if (n == except) continue;
    BroadcastQuery q = proto;
    q.sender = id();
    q.target = n;
    out.push_back(q);
  }
  return out;
}

RequestOutcome CrNode::handle_request(const ChannelRequest& req, const OccupancyView& world, double now) {
  refresh_if_stale(world, now);
  seen_.insert(req.request_id);

  RequestOutcome out;
  out.response.request_id = req.request_id;
  out.response.origin_infrastructure = req.origin_infrastructure;
  out.response.origin_node = id();
  out.response.issue_time = now;
  out.response.entries = eligible_entries(req.provider);

  if (params_.max_hops >= 1) {
    BroadcastQuery proto;
    proto.request_id = req.request_id;
    proto.origin_infrastructure = req.origin_infrastructure;
    proto.provider = req.provider;
    proto.origin_node = id();
    proto.issue_time = now;
    proto.hop_count = 1;
    out.forwards = forwards_for(proto, NodeId{});
  }
  return out;
}

BroadcastOutcome CrNode::handle_broadcast(const BroadcastQuery& query, const OccupancyView& world, double now) {
  BroadcastOutcome out;
  if (query.hop_count > params_.max_hops || seen_.contains(query.request_id)) return out;
  seen_.insert(query.request_id);
  refresh_if_stale(world, now);

  AvailabilityResponse resp;
  resp.request_id = query.request_id;
  resp.origin_infrastructure = query.origin_infrastructure;
  resp.origin_node = id();
  resp.issue_time = now;
  resp.entries = eligible_entries(query.provider);
  out.response = std::move(resp);

  if (query.hop_count < params_.max_hops) {
    BroadcastQuery proto = query;
    proto.issue_time = now;
    proto.hop_count = query.hop_count + 1;
    out.forwards = forwards_for(proto, query.sender);
  }
  return out;
}

std::vector<AvailabilityEntry> aggregate_responses(std::span<const AvailabilityResponse> responses) {
  auto wins = [](const AvailabilityEntry& a, const AvailabilityEntry& b) {
    if (a.interference_level != b.interference_level) return a.interference_level > b.interference_level;
    if (a.availability_probability != b.availability_probability) {
      return a.availability_probability < b.availability_probability;
    }
    return a.reporting_node < b.reporting_node;
  };

  std::map<ChannelId, AvailabilityEntry> merged;
  for (const auto& r : responses) {
    for (const auto& e : r.entries) {
      auto [it, inserted] = merged.try_emplace(e.channel, e);
      if (!inserted && wins(e, it->second)) it->second = e;
    }
  }
  std::vector<AvailabilityEntry> out;
  out.reserve(merged.size());
  for (auto& [_, e] : merged) out.push_back(e);
  return out;
}

}  // namespace crshare::crnet
