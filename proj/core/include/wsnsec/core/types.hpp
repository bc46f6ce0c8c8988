#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

namespace wsnsec {

using Tick = std::int64_t;
using Bytes = std::vector<std::uint8_t>;

/// Dense node identifier, 0..N-1 within one scenario.
struct NodeId {
    std::uint32_t value = 0;

    constexpr NodeId() = default;
    constexpr explicit NodeId(std::uint32_t v) : value(v) {}

    constexpr auto operator<=>(const NodeId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }

inline std::vector<NodeId> make_ids(std::initializer_list<std::uint32_t> raw) {
    std::vector<NodeId> out;
    out.reserve(raw.size());
    for (auto v : raw) out.emplace_back(v);
    return out;
}

}  // namespace wsnsec

template <>
struct std::hash<wsnsec::NodeId> {
    std::size_t operator()(wsnsec::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
