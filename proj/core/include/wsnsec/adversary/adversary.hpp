#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "wsnsec/core/packet.hpp"
#include "wsnsec/core/rng.hpp"

namespace wsnsec::adversary {

enum class AdversaryKind : std::uint8_t { Blackhole, Grayhole, CoopBlackhole, Sinkhole, HelloFlood };

std::string_view to_string(AdversaryKind kind) noexcept;
/// Accepts snake_case names ("coop_blackhole"); nullopt if unknown.
std::optional<AdversaryKind> parse_kind(std::string_view name) noexcept;

struct AdversaryProfile {
    NodeId node;
    AdversaryKind kind = AdversaryKind::Blackhole;
    /// Per-packet drop probability on the data plane. Forced to 1 for
    /// Blackhole and CoopBlackhole.
    double drop_p = 1.0;
    std::optional<NodeId> partner;   // CoopBlackhole
    std::uint32_t advertised_hops = 1;  // Sinkhole
    double range_multiplier = 3.0;   // HelloFlood
    Tick active_from = 0;
    /// When non-empty, only data-plane packets whose src or dst is listed
    /// are subject to dropping.
    std::vector<NodeId> victims;
    /// Forward data to this id instead of the real next hop.
    std::optional<NodeId> misaddress_to;
    /// Flip a payload byte on every forwarded data packet.
    bool tamper = false;

    /// Checks the profile against the kind's invariants. Throws
    /// std::invalid_argument with a description of the first violation.
    void validate(std::size_t node_count) const;
};

/// Validates partner reciprocity across a whole adversary list.
void validate_profiles(const std::vector<AdversaryProfile>& profiles, std::size_t node_count);

enum class AdversaryAction : std::uint8_t { DropData, ForgeRrep, ForgeFrp, ForgeGradient, LongReachHello, Misaddress, Tamper };

std::string_view to_string(AdversaryAction action) noexcept;

/// Omniscient record of every misbehavior, used to score detections.
class GroundTruthLedger {
public:
    struct Entry {
        Tick tick = 0;
        NodeId node;
        AdversaryAction action = AdversaryAction::DropData;
        std::uint64_t uid = 0;
        PacketKind kind = PacketKind::Data;
    };

    void record(Entry e) { entries_.push_back(e); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t count(AdversaryAction action) const;
    std::size_t count(AdversaryAction action, NodeId node) const;
    std::optional<Tick> first(AdversaryAction action, NodeId node) const;

    void mark_adversary(NodeId node) { adversaries_.insert(node); }
    bool is_adversary(NodeId node) const { return adversaries_.contains(node); }
    const std::unordered_set<NodeId>& adversaries() const noexcept { return adversaries_; }

private:
    std::vector<Entry> entries_;
    std::unordered_set<NodeId> adversaries_;
};

/// Decision logic of one compromised node. Before active_from every query
/// answers as an honest node would.
class Adversary {
public:
    Adversary(AdversaryProfile profile, std::uint64_t root_seed, GroundTruthLedger* ledger);

    const AdversaryProfile& profile() const noexcept { return profile_; }
    NodeId node() const noexcept { return profile_.node; }
    bool active(Tick now) const noexcept { return now >= profile_.active_from; }

    /// Data-plane verdict for a packet this node is asked to relay.
    enum class DataVerdict { Forward, Drop, Misaddress };
    DataVerdict on_data(const Packet& packet, Tick now);

    /// Applies the tamper mode to an outgoing payload (logs it).
    void maybe_tamper(Packet& packet, Tick now);

    /// True when this node answers every route request with a spurious reply
    /// and does not relay requests.
    bool forges_routes(Tick now) const noexcept;
    /// Claimed path suffix appended after the request path: [self, partner?, target].
    std::vector<NodeId> forged_suffix(NodeId target) const;
    void log_forged_rrep(const Packet& rrep, Tick now);

    /// Colluding partner answers both FRq questions with yes.
    bool answers_frq_yes(Tick now) const noexcept;
    void log_forged_frp(const Packet& frp, Tick now);

    /// Advertised gradient distance overriding the honest one.
    std::optional<std::uint32_t> advertised_hops(Tick now) const noexcept;
    void log_forged_gradient(const Packet& beacon, Tick now);

    /// Hellos and beacons reach range_multiplier times further.
    bool long_reach(Tick now) const noexcept;

    /// Compromised nodes do not take part in cooperative detection.
    bool ignores_cooperation(Tick now) const noexcept { return active(now); }

private:
    AdversaryProfile profile_;
    Rng rng_;
    GroundTruthLedger* ledger_;
};

}  // namespace wsnsec::adversary
