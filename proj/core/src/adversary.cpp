#include "wsnsec/adversary/adversary.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace wsnsec::adversary {

std::string_view to_string(AdversaryKind kind) noexcept {
    switch (kind) {
        case AdversaryKind::Blackhole: return "blackhole";
        case AdversaryKind::Grayhole: return "grayhole";
        case AdversaryKind::CoopBlackhole: return "coop_blackhole";
        case AdversaryKind::Sinkhole: return "sinkhole";
        case AdversaryKind::HelloFlood: return "hello_flood";
    }
    return "unknown";
}

std::optional<AdversaryKind> parse_kind(std::string_view name) noexcept {
    for (auto k : {AdversaryKind::Blackhole, AdversaryKind::Grayhole, AdversaryKind::CoopBlackhole,
                   AdversaryKind::Sinkhole, AdversaryKind::HelloFlood}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::string_view to_string(AdversaryAction action) noexcept {
    switch (action) {
        case AdversaryAction::DropData: return "drop";
        case AdversaryAction::ForgeRrep: return "forge-rrep";
        case AdversaryAction::ForgeFrp: return "forge-frp";
        case AdversaryAction::ForgeGradient: return "forge-gradient";
        case AdversaryAction::LongReachHello: return "long-reach-hello";
        case AdversaryAction::Misaddress: return "misaddress";
        case AdversaryAction::Tamper: return "tamper";
    }
    return "unknown";
}

void AdversaryProfile::validate(std::size_t node_count) const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (node.value >= node_count) fail("node " + std::to_string(node.value) + " does not exist");
    if (!(drop_p >= 0.0 && drop_p <= 1.0)) fail("drop_p must lie in [0,1]");
    if (active_from < 0) fail("active_from must be non-negative");
    for (NodeId v : victims) {
        if (v.value >= node_count) fail("victim " + std::to_string(v.value) + " does not exist");
    }
    switch (kind) {
        case AdversaryKind::CoopBlackhole:
            if (!partner) fail("coop_blackhole requires a partner");
            if (partner->value >= node_count) fail("partner " + std::to_string(partner->value) + " does not exist");
            if (*partner == node) fail("partner must differ from the node itself");
            break;
        case AdversaryKind::HelloFlood:
            if (!(range_multiplier > 1.0)) fail("range_multiplier must exceed 1");
            break;
        default: break;
    }
}

void validate_profiles(const std::vector<AdversaryProfile>& profiles, std::size_t node_count) {
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto& p = profiles[i];
        p.validate(node_count);
        for (std::size_t j = 0; j < i; ++j) {
            if (profiles[j].node == p.node) {
                throw std::invalid_argument("node " + std::to_string(p.node.value) + " has two adversary profiles");
            }
        }
        if (p.kind == AdversaryKind::CoopBlackhole) {
            auto it = std::find_if(profiles.begin(), profiles.end(),
                                   [&](const AdversaryProfile& q) { return q.node == *p.partner; });
            if (it == profiles.end() || it->kind != AdversaryKind::CoopBlackhole || it->partner != p.node) {
                throw std::invalid_argument("partner " + std::to_string(p.partner->value) +
                                            " must be a coop_blackhole naming node " + std::to_string(p.node.value));
            }
        }
    }
}

std::size_t GroundTruthLedger::count(AdversaryAction action) const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.action == action; }));
}

std::size_t GroundTruthLedger::count(AdversaryAction action, NodeId node) const {
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(), [&](const Entry& e) { return e.action == action && e.node == node; }));
}

std::optional<Tick> GroundTruthLedger::first(AdversaryAction action, NodeId node) const {
    for (const auto& e : entries_) {
        if (e.action == action && e.node == node) return e.tick;
    }
    return std::nullopt;
}

Adversary::Adversary(AdversaryProfile profile, std::uint64_t root_seed, GroundTruthLedger* ledger)
    : profile_(std::move(profile)),
      rng_(derive_seed(root_seed, "adversary", profile_.node.value)),
      ledger_(ledger) {
    if (profile_.kind == AdversaryKind::Blackhole || profile_.kind == AdversaryKind::CoopBlackhole) {
        profile_.drop_p = 1.0;
    }
    if (ledger_) ledger_->mark_adversary(profile_.node);
}

Adversary::DataVerdict Adversary::on_data(const Packet& packet, Tick now) {
    if (!active(now) || !is_data_plane(packet.kind)) return DataVerdict::Forward;
    if (!profile_.victims.empty()) {
        const bool targeted = std::find(profile_.victims.begin(), profile_.victims.end(), packet.src) !=
                                  profile_.victims.end() ||
                              std::find(profile_.victims.begin(), profile_.victims.end(), packet.dst) !=
                                  profile_.victims.end();
        if (!targeted) return DataVerdict::Forward;
    }
    // The draw is taken for every candidate packet so the stream position
    // depends only on the number of packets seen.
    if (rng_.bernoulli(profile_.drop_p)) {
        if (ledger_) ledger_->record({now, profile_.node, AdversaryAction::DropData, packet.uid, packet.kind});
        return DataVerdict::Drop;
    }
    if (profile_.misaddress_to && packet.kind == PacketKind::Data) {
        if (ledger_) ledger_->record({now, profile_.node, AdversaryAction::Misaddress, packet.uid, packet.kind});
        return DataVerdict::Misaddress;
    }
    return DataVerdict::Forward;
}

void Adversary::maybe_tamper(Packet& packet, Tick now) {
    if (!active(now) || !profile_.tamper || packet.payload.empty()) return;
    packet.payload[0] ^= 0xFF;
    if (ledger_) ledger_->record({now, profile_.node, AdversaryAction::Tamper, packet.uid, packet.kind});
}

bool Adversary::forges_routes(Tick now) const noexcept {
    if (!active(now)) return false;
    return profile_.kind == AdversaryKind::Blackhole || profile_.kind == AdversaryKind::Grayhole ||
           profile_.kind == AdversaryKind::CoopBlackhole;
}

std::vector<NodeId> Adversary::forged_suffix(NodeId target) const {
    std::vector<NodeId> out{profile_.node};
    if (profile_.kind == AdversaryKind::CoopBlackhole && profile_.partner && *profile_.partner != target) {
        out.push_back(*profile_.partner);
    }
    out.push_back(target);
    return out;
}

void Adversary::log_forged_rrep(const Packet& rrep, Tick now) {
    if (ledger_) ledger_->record({now, profile_.node, AdversaryAction::ForgeRrep, rrep.uid, rrep.kind});
}

bool Adversary::answers_frq_yes(Tick now) const noexcept {
    return active(now) && profile_.kind == AdversaryKind::CoopBlackhole;
}

void Adversary::log_forged_frp(const Packet& frp, Tick now) {
    if (ledger_) ledger_->record({now, profile_.node, AdversaryAction::ForgeFrp, frp.uid, frp.kind});
}

std::optional<std::uint32_t> Adversary::advertised_hops(Tick now) const noexcept {
    if (!active(now) || profile_.kind != AdversaryKind::Sinkhole) return std::nullopt;
    return profile_.advertised_hops;
}

void Adversary::log_forged_gradient(const Packet& beacon, Tick now) {
    if (ledger_) ledger_->record({now, profile_.node, AdversaryAction::ForgeGradient, beacon.uid, beacon.kind});
}

bool Adversary::long_reach(Tick now) const noexcept {
    return active(now) && profile_.kind == AdversaryKind::HelloFlood;
}

}  // namespace wsnsec::adversary
