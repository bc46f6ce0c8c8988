#pragma once

#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "wsnsec/core/types.hpp"

namespace wsnsec {

struct Position {
    double x = 0.0;
    double y = 0.0;
};

enum class TopologyMode { ExplicitAdjacency, UnitDisk };

/// Input to build_topology: either an explicit edge list or positions plus a
/// radio range.
struct TopologySpec {
    TopologyMode mode = TopologyMode::ExplicitAdjacency;
    std::vector<std::uint32_t> node_ids;  // explicit mode; must be a permutation of 0..N-1
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<Position> positions;  // unit-disk mode; index = node id
    double radio_range = 0.0;

    static TopologySpec explicit_edges(std::uint32_t node_count,
                                       std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);
    static TopologySpec unit_disk(std::vector<Position> positions, double range);
};

/// Symmetric, irreflexive neighbor relation over dense node ids.
class Topology {
public:
    Topology() = default;

    std::size_t size() const noexcept { return neighbors_.size(); }
    TopologyMode mode() const noexcept { return mode_; }
    double radio_range() const noexcept { return range_; }

    bool contains(NodeId n) const noexcept { return n.value < neighbors_.size(); }
    /// Sorted ascending.
    const std::vector<NodeId>& neighbors(NodeId n) const;
    bool adjacent(NodeId a, NodeId b) const;
    std::optional<Position> position(NodeId n) const;

    /// Nodes within `hops` graph hops (explicit mode) or `range` meters
    /// (unit-disk mode) of `n`, excluding `n` itself. Used for long-reach
    /// transmitters.
    std::vector<NodeId> reach(NodeId n, double range_multiplier) const;

    /// Breadth-first hop distance from `root` over the adjacency, skipping
    /// nodes in `excluded`. Unreachable nodes get nullopt.
    std::vector<std::optional<std::uint32_t>> bfs_hops(NodeId root,
                                                       const std::unordered_set<NodeId>& excluded = {}) const;

    std::size_t edge_count() const noexcept;

private:
    friend Topology build_topology(const TopologySpec& spec);

    TopologyMode mode_ = TopologyMode::ExplicitAdjacency;
    double range_ = 0.0;
    std::vector<std::vector<NodeId>> neighbors_;
    std::vector<std::unordered_set<std::uint32_t>> lookup_;
    std::vector<Position> positions_;
};

/// Throws std::invalid_argument on duplicate ids, unknown edge endpoints,
/// self-loops, or a non-positive range.
Topology build_topology(const TopologySpec& spec);

}  // namespace wsnsec
