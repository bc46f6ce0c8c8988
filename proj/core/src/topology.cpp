#include "wsnsec/core/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace wsnsec {

TopologySpec TopologySpec::explicit_edges(std::uint32_t node_count,
                                          std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
    TopologySpec spec;
    spec.mode = TopologyMode::ExplicitAdjacency;
    spec.node_ids.resize(node_count);
    for (std::uint32_t i = 0; i < node_count; ++i) spec.node_ids[i] = i;
    spec.edges = std::move(edges);
    return spec;
}

TopologySpec TopologySpec::unit_disk(std::vector<Position> positions, double range) {
    TopologySpec spec;
    spec.mode = TopologyMode::UnitDisk;
    spec.positions = std::move(positions);
    spec.radio_range = range;
    return spec;
}

namespace {

void link(std::vector<std::vector<NodeId>>& nbrs, std::vector<std::unordered_set<std::uint32_t>>& lookup,
          std::uint32_t a, std::uint32_t b) {
    if (lookup[a].insert(b).second) nbrs[a].emplace_back(b);
    if (lookup[b].insert(a).second) nbrs[b].emplace_back(a);
}

}  // namespace

Topology build_topology(const TopologySpec& spec) {
    Topology topo;
    topo.mode_ = spec.mode;
    std::size_t n = 0;

    if (spec.mode == TopologyMode::ExplicitAdjacency) {
        n = spec.node_ids.size();
        std::vector<bool> seen(n, false);
        for (auto id : spec.node_ids) {
            if (id >= n) throw std::invalid_argument("node id " + std::to_string(id) + " is not dense in 0.." + std::to_string(n ? n - 1 : 0));
            if (seen[id]) throw std::invalid_argument("duplicate node id " + std::to_string(id));
            seen[id] = true;
        }
    } else {
        if (!(spec.radio_range > 0.0)) throw std::invalid_argument("radio_range must be positive");
        n = spec.positions.size();
        topo.range_ = spec.radio_range;
        topo.positions_ = spec.positions;
    }

    topo.neighbors_.assign(n, {});
    topo.lookup_.assign(n, {});

    if (spec.mode == TopologyMode::ExplicitAdjacency) {
        for (auto [a, b] : spec.edges) {
            if (a >= n || b >= n) {
                throw std::invalid_argument("edge (" + std::to_string(a) + "," + std::to_string(b) + ") references unknown node");
            }
            if (a == b) throw std::invalid_argument("self-loop on node " + std::to_string(a));
            link(topo.neighbors_, topo.lookup_, a, b);
        }
    } else {
        const double r2 = spec.radio_range * spec.radio_range;
        for (std::uint32_t a = 0; a < n; ++a) {
            for (std::uint32_t b = a + 1; b < n; ++b) {
                const double dx = spec.positions[a].x - spec.positions[b].x;
                const double dy = spec.positions[a].y - spec.positions[b].y;
                if (dx * dx + dy * dy <= r2) link(topo.neighbors_, topo.lookup_, a, b);
            }
        }
    }
    for (auto& list : topo.neighbors_) std::sort(list.begin(), list.end());
    return topo;
}

const std::vector<NodeId>& Topology::neighbors(NodeId n) const {
    if (!contains(n)) throw std::out_of_range("unknown node " + std::to_string(n.value));
    return neighbors_[n.value];
}

bool Topology::adjacent(NodeId a, NodeId b) const {
    if (!contains(a) || !contains(b)) return false;
    return lookup_[a.value].contains(b.value);
}

std::optional<Position> Topology::position(NodeId n) const {
    if (mode_ != TopologyMode::UnitDisk || !contains(n)) return std::nullopt;
    return positions_[n.value];
}

std::vector<NodeId> Topology::reach(NodeId n, double range_multiplier) const {
    std::vector<NodeId> out;
    if (!contains(n)) return out;
    if (mode_ == TopologyMode::UnitDisk) {
        const double r = range_ * range_multiplier;
        const Position p = positions_[n.value];
        for (std::uint32_t i = 0; i < positions_.size(); ++i) {
            if (i == n.value) continue;
            const double dx = positions_[i].x - p.x;
            const double dy = positions_[i].y - p.y;
            if (dx * dx + dy * dy <= r * r) out.emplace_back(i);
        }
        return out;
    }
    // Explicit graphs have no geometry: reach scales in whole hops.
    const auto hops = bfs_hops(n);
    const auto limit = static_cast<std::uint32_t>(std::max(1.0, std::floor(range_multiplier)));
    for (std::uint32_t i = 0; i < hops.size(); ++i) {
        if (i != n.value && hops[i] && *hops[i] <= limit) out.emplace_back(i);
    }
    return out;
}

std::vector<std::optional<std::uint32_t>> Topology::bfs_hops(NodeId root,
                                                             const std::unordered_set<NodeId>& excluded) const {
    std::vector<std::optional<std::uint32_t>> dist(size());
    if (!contains(root) || excluded.contains(root)) return dist;
    std::deque<NodeId> frontier{root};
    dist[root.value] = 0;
    while (!frontier.empty()) {
        const NodeId u = frontier.front();
        frontier.pop_front();
        for (NodeId v : neighbors_[u.value]) {
            if (dist[v.value] || excluded.contains(v)) continue;
            dist[v.value] = *dist[u.value] + 1;
            frontier.push_back(v);
        }
    }
    return dist;
}

std::size_t Topology::edge_count() const noexcept {
    std::size_t sum = 0;
    for (const auto& l : neighbors_) sum += l.size();
    return sum / 2;
}

}  // namespace wsnsec
