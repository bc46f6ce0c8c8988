#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "wsnsec/core/types.hpp"

namespace wsnsec {

enum class PacketKind : std::uint8_t {
    Data,
    Hello,
    Rreq,
    Rrep,
    FRq,
    FRp,
    Probe,
    FurtherProbe,
    Notification,
    CoopDetectRequest,
    KeyDisclosure,
    BroadcastClaim,
    CounterResync,
    ProbeQuery,
    ProbeReply,
    AuthBroadcast,
    NeighborList,
    GradientBeacon,
};

std::string_view to_string(PacketKind kind) noexcept;

/// True for kinds that adversaries treat as forwarded payload traffic
/// (as opposed to routing control).
constexpr bool is_data_plane(PacketKind kind) noexcept {
    return kind == PacketKind::Data || kind == PacketKind::Probe || kind == PacketKind::FurtherProbe;
}

struct NoBody {};

struct RreqBody {
    NodeId origin;
    std::uint32_t request_id = 0;
    NodeId target;
    std::vector<NodeId> path;   // origin first, appended per hop
    std::vector<NodeId> avoid;  // nodes that must not relay or answer
    bool neighbors_only = false;  // recipients answer but never re-flood
};

struct RrepBody {
    NodeId origin;
    std::uint32_t request_id = 0;
    NodeId target;
    NodeId responder;
    std::vector<NodeId> path;  // full claimed route origin..target
    std::uint32_t target_seq = 0;
};

struct FurtherRequestBody {
    std::uint32_t query_id = 0;
    NodeId asker;
    NodeId about;  // the node that named us as its next hop
    NodeId destination;
};

struct FurtherReplyBody {
    std::uint32_t query_id = 0;
    bool has_route_to_about = false;
    bool has_route_to_destination = false;
};

struct ProbeBody {
    std::uint32_t round_id = 0;
    NodeId initiator;
    std::uint8_t sequence = 0;
};

struct CoopRequestBody {
    std::uint32_t round_id = 0;
    NodeId initiator;
    NodeId suspect;
};

struct ProbeQueryBody {
    std::uint32_t round_id = 0;
    NodeId suspect;
    std::uint64_t probe_uid = 0;
    bool received = false;  // meaningful in ProbeReply only
};

struct NeighborListBody {
    NodeId owner;
    std::vector<NodeId> neighbors;
    /// Lists this node heard from its own neighbors (relayed confirmations).
    std::vector<std::pair<NodeId, std::vector<NodeId>>> relayed;
};

struct GradientBody {
    std::uint32_t hops = 0;
};

struct ClaimBody {
    std::uint64_t data_uid = 0;
    NodeId claimer;
    std::uint32_t layer = 0;  // hop index the claimer will transmit at
};

/// Opaque credential carried by a hello (e.g. public key plus Merkle path).
struct HelloBody {
    Bytes credential;
};

struct DisclosureBody {
    std::uint32_t interval = 0;
    std::array<std::uint8_t, 16> key{};
};

using PacketBody = std::variant<NoBody, RreqBody, RrepBody, FurtherRequestBody, FurtherReplyBody, ProbeBody,
                                CoopRequestBody, ProbeQueryBody, NeighborListBody, GradientBody, ClaimBody,
                                DisclosureBody, HelloBody>;

/// Encoded length in bytes of the control body, as if serialized with
/// 4-byte ids and counters.
std::size_t body_wire_size(const PacketBody& body) noexcept;

struct Packet {
    std::uint64_t uid = 0;
    PacketKind kind = PacketKind::Data;
    NodeId src;
    NodeId dst;
    std::optional<NodeId> next_hop;  // nullopt = broadcast
    Bytes payload;
    std::optional<std::array<std::uint8_t, 16>> tag;
    std::optional<std::uint64_t> counter;
    std::uint32_t ttl = 32;
    /// Explicit route to follow (origin first). Empty means the holder picks
    /// the next hop from its own state.
    std::vector<NodeId> route;
    /// Number of forwarding steps taken so far.
    std::uint32_t hop_index = 0;
    PacketBody body;

    bool is_broadcast() const noexcept { return !next_hop.has_value(); }

    /// Header bits plus 8 bits per payload byte (control bodies count as
    /// payload).
    std::uint64_t size_bits(std::uint64_t header_bits) const noexcept;

    /// Next node after `self` on the explicit route, if any.
    std::optional<NodeId> route_successor(NodeId self) const;
    std::optional<NodeId> route_predecessor(NodeId self) const;
};

}  // namespace wsnsec
