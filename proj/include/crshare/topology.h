#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "crshare/config.h"
#include "crshare/ids.h"

namespace crshare {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Vertex positions of a hex cell are merged when closer than this (meters).
inline constexpr double kVertexMergeTolerance = 1e-6;

struct Channel {
  ChannelId id;
  ProviderId owner;
  double center_frequency_mhz = 0.0;
  double availability_probability = 1.0;  // prior used before any sensing sample
  double interference_level = 1.0;
  double cost = 0.0;  // money per second

  friend bool operator==(const Channel&, const Channel&) = default;
};

struct ServiceProvider {
  ProviderId id;
  std::vector<ChannelId> licensed_channels;  // ascending
  double unit_price_alpha = 0.0;
  std::vector<InfraId> infrastructures;  // one per cell, in cell order
  bool shares = false;

  friend bool operator==(const ServiceProvider&, const ServiceProvider&) = default;
};

struct Cell {
  CellId id;
  Vec2 center;
  std::array<Vec2, 6> vertices;

  friend bool operator==(const Cell&, const Cell&) = default;
};

// Static part of a base station; call and channel state lives in the engine.
struct Infrastructure {
  InfraId id;
  ProviderId provider;
  CellId cell;
  Vec2 position;
  double cell_radius = 0.0;
  int capacity_users_per_channel = 10;

  friend bool operator==(const Infrastructure&, const Infrastructure&) = default;
};

struct CrNodeSite {
  NodeId id;
  Vec2 position;
  double sensing_range = 0.0;
  std::vector<NodeId> neighbors;        // ascending, symmetric relation
  std::vector<CellId> cells_in_range;   // ascending
  std::vector<InfraId> infrastructures_in_range;  // ascending

  friend bool operator==(const CrNodeSite&, const CrNodeSite&) = default;
};

struct Topology {
  std::vector<ServiceProvider> providers;
  std::vector<Cell> cells;
  std::vector<Infrastructure> infrastructures;
  std::vector<Channel> channels;
  std::vector<CrNodeSite> nodes;

  InfraId infra_at(CellId cell, ProviderId provider) const {
    return providers[provider.index()].infrastructures[cell.index()];
  }
  // The CR node an infrastructure addresses its channel requests to: the
  // lowest-id node whose sensing range covers it.
  NodeId request_target(InfraId infra) const { return request_targets[infra.index()]; }

  std::vector<NodeId> request_targets;

  friend bool operator==(const Topology&, const Topology&) = default;
};

// Flat-top hexagon centres for a rows x cols offset grid of circumradius r.
std::vector<Cell> hex_grid(GridDims dims, double radius);

// Merges vertices within kVertexMergeTolerance; returns unique positions in
// order of first appearance.
std::vector<Vec2> unique_vertices(std::span<const Cell> cells);

Topology build_topology(const ScenarioConfig& config);

}  // namespace crshare
