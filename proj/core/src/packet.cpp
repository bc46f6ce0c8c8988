#include "wsnsec/core/packet.hpp"

#include <algorithm>

namespace wsnsec {

std::string_view to_string(PacketKind kind) noexcept {
    switch (kind) {
        case PacketKind::Data: return "Data";
        case PacketKind::Hello: return "Hello";
        case PacketKind::Rreq: return "Rreq";
        case PacketKind::Rrep: return "Rrep";
        case PacketKind::FRq: return "FRq";
        case PacketKind::FRp: return "FRp";
        case PacketKind::Probe: return "Probe";
        case PacketKind::FurtherProbe: return "FurtherProbe";
        case PacketKind::Notification: return "Notification";
        case PacketKind::CoopDetectRequest: return "CoopDetectRequest";
        case PacketKind::KeyDisclosure: return "KeyDisclosure";
        case PacketKind::BroadcastClaim: return "BroadcastClaim";
        case PacketKind::CounterResync: return "CounterResync";
        case PacketKind::ProbeQuery: return "ProbeQuery";
        case PacketKind::ProbeReply: return "ProbeReply";
        case PacketKind::AuthBroadcast: return "AuthBroadcast";
        case PacketKind::NeighborList: return "NeighborList";
        case PacketKind::GradientBeacon: return "GradientBeacon";
    }
    return "Unknown";
}

namespace {

constexpr std::size_t kId = 4;

struct WireSize {
    std::size_t operator()(const NoBody&) const { return 0; }
    std::size_t operator()(const RreqBody& b) const { return 4 * kId + 1 + kId * (b.path.size() + b.avoid.size()); }
    std::size_t operator()(const RrepBody& b) const { return 6 * kId + kId * b.path.size(); }
    std::size_t operator()(const FurtherRequestBody&) const { return 4 * kId; }
    std::size_t operator()(const FurtherReplyBody&) const { return kId + 2; }
    std::size_t operator()(const ProbeBody&) const { return 2 * kId + 1; }
    std::size_t operator()(const CoopRequestBody&) const { return 3 * kId; }
    std::size_t operator()(const ProbeQueryBody&) const { return 2 * kId + 8 + 1; }
    std::size_t operator()(const NeighborListBody& b) const {
        std::size_t n = kId + kId * b.neighbors.size();
        for (const auto& [owner, list] : b.relayed) n += kId + kId + kId * list.size();
        return n;
    }
    std::size_t operator()(const GradientBody&) const { return kId; }
    std::size_t operator()(const ClaimBody&) const { return 8 + 2 * kId; }
    std::size_t operator()(const DisclosureBody& b) const { return kId + b.key.size(); }
    std::size_t operator()(const HelloBody& b) const { return b.credential.size(); }
};

}  // namespace

std::size_t body_wire_size(const PacketBody& body) noexcept { return std::visit(WireSize{}, body); }

std::uint64_t Packet::size_bits(std::uint64_t header_bits) const noexcept {
    std::size_t bytes = payload.size() + body_wire_size(body) + kId * route.size();
    if (tag) bytes += tag->size();
    return header_bits + 8 * bytes;
}

std::optional<NodeId> Packet::route_successor(NodeId self) const {
    auto it = std::find(route.begin(), route.end(), self);
    if (it == route.end() || std::next(it) == route.end()) return std::nullopt;
    return *std::next(it);
}

std::optional<NodeId> Packet::route_predecessor(NodeId self) const {
    auto it = std::find(route.begin(), route.end(), self);
    if (it == route.end() || it == route.begin()) return std::nullopt;
    return *std::prev(it);
}

}  // namespace wsnsec
