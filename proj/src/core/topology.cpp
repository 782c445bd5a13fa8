#include "crshare/topology.h"

#include <algorithm>
#include <map>
#include <numbers>
#include <set>
#include <utility>

#include "crshare/rng.h"

namespace crshare {

namespace {

// Interns points on a quantized lattice; a lookup checks the 3x3 lattice
// neighbourhood so points straddling a rounding boundary still merge.
class VertexIndex {
 public:
  std::size_t intern(Vec2 p) {
    const auto key = quantize(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = lattice_.find({key.first + dx, key.second + dy});
        if (it == lattice_.end()) continue;
        for (std::size_t idx : it->second) {
          if (distance(points_[idx], p) <= kVertexMergeTolerance) return idx;
        }
      }
    }
    points_.push_back(p);
    lattice_[key].push_back(points_.size() - 1);
    return points_.size() - 1;
  }

  const std::vector<Vec2>& points() const { return points_; }

 private:
  static std::pair<std::int64_t, std::int64_t> quantize(Vec2 p) {
    return {std::llround(p.x / kVertexMergeTolerance), std::llround(p.y / kVertexMergeTolerance)};
  }

  std::vector<Vec2> points_;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> lattice_;
};

}  // namespace

std::vector<Cell> hex_grid(GridDims dims, double radius) {
  std::vector<Cell> cells;
  const double h = std::numbers::sqrt3 * radius;
  for (int row = 0; row < dims.rows; ++row) {
    for (int col = 0; col < dims.cols; ++col) {
      Cell cell;
      cell.id = CellId(cells.size());
      cell.center = {1.5 * radius * col, h * (row + 0.5 * (col & 1))};
      for (int k = 0; k < 6; ++k) {
        const double a = std::numbers::pi / 3.0 * k;
        cell.vertices[k] = {cell.center.x + radius * std::cos(a), cell.center.y + radius * std::sin(a)};
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<Vec2> unique_vertices(std::span<const Cell> cells) {
  VertexIndex index;
  for (const auto& cell : cells) {
    for (const auto& v : cell.vertices) index.intern(v);
  }
  return index.points();
}

Topology build_topology(const ScenarioConfig& config) {
  if (config.grid_dims.rows < 1 || config.grid_dims.cols < 1) {
    throw ConfigError("grid_dims", "grid must contain at least one cell");
  }
  if (config.n_providers < 1 || config.n_providers > kMaxProviders) {
    throw ConfigError("n_providers", "must be between 1 and " + std::to_string(kMaxProviders));
  }
  validate(config);

  Topology topo;
  topo.cells = hex_grid(config.grid_dims, config.cell_radius);
  const auto n_providers = static_cast<std::size_t>(config.n_providers);
  const auto per_provider = static_cast<std::size_t>(config.channels_per_provider);

  auto channel_rng = make_stream(config.seed, StreamPurpose::kChannels);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t p = 0; p < n_providers; ++p) {
    ServiceProvider sp;
    sp.id = ProviderId(p);
    sp.unit_price_alpha = config.unit_price_alpha[p];
    sp.shares = config.provider_shares(p);
    for (std::size_t k = 0; k < per_provider; ++k) {
      Channel ch;
      ch.id = ChannelId(topo.channels.size());
      ch.owner = sp.id;
      ch.center_frequency_mhz =
          config.base_frequency_mhz + config.channel_spacing_mhz * static_cast<double>(ch.id.index());
      if (config.uniform_channel_params) {
        ch.availability_probability = 1.0;
        ch.interference_level = 1.0;
        ch.cost = sp.unit_price_alpha;
      } else {
        ch.availability_probability = 0.5 + 0.5 * unit(channel_rng);
        ch.interference_level = 0.5 + unit(channel_rng);
        ch.cost = sp.unit_price_alpha * (0.5 + unit(channel_rng));
      }
      sp.licensed_channels.push_back(ch.id);
      topo.channels.push_back(ch);
    }
    topo.providers.push_back(std::move(sp));
  }

  // Co-located base stations: one per provider per cell, at the cell centre.
  for (const auto& cell : topo.cells) {
    for (auto& sp : topo.providers) {
      Infrastructure infra;
      infra.id = InfraId(topo.infrastructures.size());
      infra.provider = sp.id;
      infra.cell = cell.id;
      infra.position = cell.center;
      infra.cell_radius = config.cell_radius;
      infra.capacity_users_per_channel = config.capacity_users_per_channel;
      sp.infrastructures.push_back(infra.id);
      topo.infrastructures.push_back(infra);
    }
  }

  // CR nodes on the distinct cell vertices; hex edges form the node network.
  VertexIndex index;
  std::vector<std::array<std::size_t, 6>> cell_vertex_ids;
  for (const auto& cell : topo.cells) {
    std::array<std::size_t, 6> ids{};
    for (int k = 0; k < 6; ++k) ids[k] = index.intern(cell.vertices[k]);
    cell_vertex_ids.push_back(ids);
  }
  const auto& points = index.points();
  std::vector<std::set<std::size_t>> adjacency(points.size());
  for (const auto& ids : cell_vertex_ids) {
    for (int k = 0; k < 6; ++k) {
      const std::size_t a = ids[k];
      const std::size_t b = ids[(k + 1) % 6];
      adjacency[a].insert(b);
      adjacency[b].insert(a);
    }
  }

  const double range = config.cell_radius * (1.0 + 1e-9) + kVertexMergeTolerance;
  for (std::size_t v = 0; v < points.size(); ++v) {
    CrNodeSite node;
    node.id = NodeId(v);
    node.position = points[v];
    node.sensing_range = range;
    for (std::size_t n : adjacency[v]) node.neighbors.push_back(NodeId(n));
    for (const auto& cell : topo.cells) {
      if (distance(cell.center, node.position) <= range) node.cells_in_range.push_back(cell.id);
    }
    for (const auto& infra : topo.infrastructures) {
      if (distance(infra.position, node.position) <= range) node.infrastructures_in_range.push_back(infra.id);
    }
    topo.nodes.push_back(std::move(node));
  }

  topo.request_targets.assign(topo.infrastructures.size(), NodeId{});
  for (const auto& node : topo.nodes) {
    for (InfraId infra : node.infrastructures_in_range) {
      if (!topo.request_targets[infra.index()].valid()) topo.request_targets[infra.index()] = node.id;
    }
  }
  return topo;
}

}  // namespace crshare
