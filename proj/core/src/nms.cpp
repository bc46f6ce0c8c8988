#include "wsnsec/nms/nms.hpp"

#include <algorithm>
#include <string>

namespace wsnsec::nms {

void NeighborKnowledge::heard_list(NodeId owner, const std::vector<NodeId>& neighbors) {
    if (!one_hop_.contains(owner)) return;
    std::set<NodeId> list(neighbors.begin(), neighbors.end());
    two_hop_[owner] = list;
    lists_[owner][owner] = std::move(list);
}

void NeighborKnowledge::heard_relayed(NodeId relayer, NodeId owner, const std::vector<NodeId>& neighbors) {
    if (!one_hop_.contains(relayer) || owner == self_) return;
    lists_[owner][relayer] = std::set<NodeId>(neighbors.begin(), neighbors.end());
}

ClaimStatus NeighborKnowledge::assess(NodeId v, NodeId x) const {
    if (v == x) return ClaimStatus::Refuted;
    if (x == self_) return one_hop_.contains(v) ? ClaimStatus::Verified : ClaimStatus::Refuted;
    auto it = lists_.find(x);
    if (it == lists_.end()) return ClaimStatus::Refuted;
    bool independent = false;
    bool via_v = false;
    for (const auto& [source, list] : it->second) {
        if (source == v) {
            via_v = via_v || list.contains(v);
            continue;
        }
        if (list.contains(v)) return ClaimStatus::Verified;
        independent = true;
    }
    if (independent || !via_v) return ClaimStatus::Refuted;
    return ClaimStatus::Unverifiable;
}

const crypto::Key* ClusterKeyring::key_of(NodeId owner) const {
    auto it = keys_.find(owner);
    return it == keys_.end() ? nullptr : &it->second;
}

crypto::Key cluster_key(const crypto::Key& master, NodeId owner) {
    return crypto::derive_key(master, "cluster:" + std::to_string(owner.value));
}

std::vector<ClusterKeyring> provision_cluster_keys(const Topology& topology, const crypto::Key& master) {
    std::vector<ClusterKeyring> out;
    out.reserve(topology.size());
    for (std::uint32_t i = 0; i < topology.size(); ++i) {
        ClusterKeyring ring(NodeId{i}, cluster_key(master, NodeId{i}));
        for (NodeId n : topology.neighbors(NodeId{i})) ring.add(n, cluster_key(master, n));
        out.push_back(std::move(ring));
    }
    return out;
}

void MonitorBuffer::insert(MonitorEntry entry) { entries_.insert_or_assign(entry.uid, std::move(entry)); }

MonitorEntry* MonitorBuffer::find(std::uint64_t uid) {
    auto it = entries_.find(uid);
    return it == entries_.end() ? nullptr : &it->second;
}

const MonitorEntry* MonitorBuffer::find(std::uint64_t uid) const {
    auto it = entries_.find(uid);
    return it == entries_.end() ? nullptr : &it->second;
}

bool MonitorBuffer::erase(std::uint64_t uid) { return entries_.erase(uid) > 0; }

GradientTable GradientTable::from_bfs(const Topology& topology, NodeId base, const std::unordered_set<NodeId>& excluded) {
    return GradientTable{topology.bfs_hops(base, excluded)};
}

std::vector<NodeId> GradientTable::candidates(const Topology& topology, NodeId node) const {
    std::vector<NodeId> out;
    const auto& own = hops.at(node.value);
    if (!own) return out;
    for (NodeId n : topology.neighbors(node)) {
        if (hops.at(n.value) && *hops[n.value] < *own) out.push_back(n);
    }
    return out;
}

std::optional<NodeId> next_hop_select(std::uint32_t own_hops, const std::map<NodeId, std::uint32_t>& neighbor_hops,
                                      const std::set<NodeId>& blacklist, const std::set<NodeId>& exclude) {
    std::optional<NodeId> best;
    std::uint32_t best_hops = own_hops;
    // Map order is ascending id, so strict < keeps the lowest id on ties.
    for (const auto& [n, h] : neighbor_hops) {
        if (h >= own_hops || blacklist.contains(n) || exclude.contains(n)) continue;
        if (!best || h < best_hops) {
            best = n;
            best_hops = h;
        }
    }
    return best;
}

std::optional<NodeId> next_hop_select(const GradientTable& gradient, const Topology& topology, NodeId node,
                                      const std::set<NodeId>& blacklist) {
    const auto& own = gradient.hops.at(node.value);
    if (!own) return std::nullopt;
    std::map<NodeId, std::uint32_t> view;
    for (NodeId n : topology.neighbors(node)) {
        if (gradient.hops.at(n.value)) view.emplace(n, *gradient.hops[n.value]);
    }
    return next_hop_select(*own, view, blacklist);
}

NmsAgent::NmsAgent(Simulator& sim, NodeId self, NmsConfig config, ClusterKeyring keys,
                   adversary::Adversary* adversary, DetectionLog* detections)
    : sim_(sim),
      self_(self),
      config_(config),
      keys_(std::move(keys)),
      adversary_(adversary),
      detections_(detections),
      knowledge_(self) {
    if (adversary_ && adversary_->profile().kind == adversary::AdversaryKind::HelloFlood) {
        sim_.set_long_reach(self_, adversary_->profile().range_multiplier);
    }
}

bool NmsAgent::is_adversary() const { return adversary_ && adversary_->active(sim_.now()); }

void NmsAgent::start() {
    sim_.schedule_timer(self_, config_.hello_at, [this] {
        Packet h;
        h.uid = sim_.next_uid();
        h.kind = PacketKind::Hello;
        h.src = self_;
        h.dst = self_;
        h.body = HelloBody{};
        sim_.transmit(self_, std::move(h), adversary_ && adversary_->long_reach(sim_.now()));
    });
    auto list_packet = [this](bool with_relays) {
        NeighborListBody body{self_, {knowledge_.one_hop().begin(), knowledge_.one_hop().end()}, {}};
        if (adversary_ && adversary_->active(sim_.now()) && adversary_->profile().misaddress_to) {
            // The misaddressing node also lies about having that neighbor.
            body.neighbors.push_back(*adversary_->profile().misaddress_to);
        }
        if (with_relays) body.relayed.assign(lists_heard_.begin(), lists_heard_.end());
        Packet p;
        p.uid = sim_.next_uid();
        p.kind = PacketKind::NeighborList;
        p.src = self_;
        p.dst = self_;
        p.body = std::move(body);
        sim_.transmit(self_, std::move(p));
    };
    sim_.schedule_timer(self_, config_.list_at, [list_packet] { list_packet(false); });
    sim_.schedule_timer(self_, config_.relay_at, [list_packet] { list_packet(true); });
    if (self_ == config_.base_station) {
        sim_.schedule_timer(self_, config_.beacon_at, [this] {
            hops_ = 0;
            broadcast_beacon(0);
        });
    }
}

void NmsAgent::broadcast_beacon(std::uint32_t hops) {
    if (auto forged = adversary_ ? adversary_->advertised_hops(sim_.now()) : std::nullopt) {
        if (beacon_sent_) return;
        hops = *forged;
    }
    beacon_sent_ = true;
    Packet b;
    b.uid = sim_.next_uid();
    b.kind = PacketKind::GradientBeacon;
    b.src = self_;
    b.dst = self_;
    b.body = GradientBody{hops};
    if (adversary_ && adversary_->advertised_hops(sim_.now())) adversary_->log_forged_gradient(b, sim_.now());
    sim_.transmit(self_, std::move(b), adversary_ && adversary_->long_reach(sim_.now()));
}

void NmsAgent::on_receive(const Delivery& d) {
    switch (d.packet.kind) {
        case PacketKind::Hello:
            knowledge_.heard_hello(d.transmitter);
            break;
        case PacketKind::NeighborList: {
            const auto& body = std::get<NeighborListBody>(d.packet.body);
            knowledge_.heard_list(body.owner, body.neighbors);
            if (knowledge_.one_hop().contains(body.owner) && body.relayed.empty()) {
                lists_heard_[body.owner] = body.neighbors;
            }
            for (const auto& [owner, list] : body.relayed) knowledge_.heard_relayed(d.transmitter, owner, list);
            break;
        }
        case PacketKind::GradientBeacon: {
            if (!knowledge_.one_hop().contains(d.transmitter) || self_ == config_.base_station) break;
            const auto hops = std::get<GradientBody>(d.packet.body).hops;
            neighbor_hops_[d.transmitter] = hops;
            if (!hops_ || hops + 1 < *hops_) {
                hops_ = hops + 1;
                broadcast_beacon(*hops_);
            }
            break;
        }
        case PacketKind::Data:
            on_data(d);
            break;
        case PacketKind::BroadcastClaim:
            on_claim(d);
            break;
        default:
            break;
    }
}

std::optional<NodeId> NmsAgent::next_hop(const std::set<NodeId>& exclude) const {
    if (!hops_ || self_ == config_.base_station) return std::nullopt;
    return next_hop_select(*hops_, neighbor_hops_, blacklist_, exclude);
}

std::optional<Bytes> NmsAgent::open(const Packet& p, NodeId transmitter) {
    const crypto::Key* key = keys_.key_of(transmitter);
    if (!key) {
        ++counters_.undecryptable;
        return std::nullopt;
    }
    ++counters_.decrypted;
    sim_.charge_compute(self_, config_.crypto_instructions);
    return crypto::ctr_decrypt(*key, p.uid, p.payload);
}

std::uint64_t NmsAgent::send_data(Bytes payload) {
    const std::uint64_t uid = sim_.next_uid();
    sim_.data_ledger().generated(uid, self_, sim_.now());
    const auto next = next_hop();
    if (!next) {
        ++counters_.routing_failures;
        sim_.data_ledger().lost(uid, LossCause::NoRoute);
        return uid;
    }
    const std::uint32_t ttl = 32;
    transmit_data(uid, self_, config_.base_station, ttl, payload, *next, 0, false);
    if (config_.monitoring && *next != config_.base_station) {
        buffer_primary(uid, self_, config_.base_station, ttl, payload, *next, 0);
    }
    return uid;
}

void NmsAgent::transmit_data(std::uint64_t uid, NodeId source, NodeId destination, std::uint32_t ttl,
                             const Bytes& plaintext, NodeId next, std::uint32_t hop_index, bool tamper) {
    Packet p;
    p.uid = uid;
    p.kind = PacketKind::Data;
    p.src = source;
    p.dst = destination;
    p.next_hop = next;
    p.ttl = ttl;
    p.hop_index = hop_index;
    p.payload = plaintext;
    if (tamper && adversary_) adversary_->maybe_tamper(p, sim_.now());
    sim_.charge_compute(self_, config_.crypto_instructions);
    p.payload = crypto::ctr_encrypt(keys_.own(), uid, p.payload);
    sim_.transmit(self_, std::move(p));
}

void NmsAgent::buffer_primary(std::uint64_t uid, NodeId source, NodeId destination, std::uint32_t ttl,
                              const Bytes& plaintext, NodeId next, std::uint32_t hop_index) {
    const Tick wait = config_.monitor_timeout + config_.primary_grace;
    buffer_.insert({uid, plaintext, next, hop_index, sim_.now() + wait, MonitorRole::Primary, source, destination, ttl});
    arm(uid, wait);
}

void NmsAgent::arm(std::uint64_t uid, Tick delay) {
    if (auto it = timers_.find(uid); it != timers_.end()) sim_.cancel_timer(it->second);
    timers_[uid] = sim_.schedule_timer(self_, delay, [this, uid] {
        timers_.erase(uid);
        on_deadline(uid);
    });
}

void NmsAgent::on_data(const Delivery& d) {
    const Packet& p = d.packet;
    const bool addressed = p.next_hop && *p.next_hop == self_;

    if (addressed && self_ == p.dst) {
        if (open(p, d.transmitter)) sim_.data_ledger().delivered(p.uid, sim_.now());
        return;
    }
    if (addressed) {
        if (p.ttl <= 1) {
            sim_.data_ledger().lost(p.uid, LossCause::TtlExpired);
            return;
        }
        const auto plaintext = open(p, d.transmitter);
        if (!plaintext) return;
        std::optional<NodeId> next;
        if (adversary_) {
            switch (adversary_->on_data(p, sim_.now())) {
                case adversary::Adversary::DataVerdict::Drop:
                    sim_.data_ledger().lost(p.uid, LossCause::AdversaryDrop);
                    return;
                case adversary::Adversary::DataVerdict::Misaddress:
                    next = adversary_->profile().misaddress_to;
                    break;
                case adversary::Adversary::DataVerdict::Forward:
                    break;
            }
        }
        if (!next) next = next_hop();
        if (!next) {
            ++counters_.routing_failures;
            sim_.data_ledger().lost(p.uid, LossCause::NoRoute);
            return;
        }
        transmit_data(p.uid, p.src, p.dst, p.ttl - 1, *plaintext, *next, p.hop_index + 1, true);
        if (config_.monitoring && !is_adversary() && *next != p.dst) {
            buffer_primary(p.uid, p.src, p.dst, p.ttl - 1, *plaintext, *next, p.hop_index + 1);
        } else if (buffer_.erase(p.uid)) {
            if (auto it = timers_.find(p.uid); it != timers_.end()) {
                sim_.cancel_timer(it->second);
                timers_.erase(it);
            }
        }
        return;
    }

    const auto plaintext = open(p, d.transmitter);
    if (!plaintext || !config_.monitoring || is_adversary()) return;

    if (MonitorEntry* e = buffer_.find(p.uid)) {
        if (p.hop_index != e->layer + 1) return;
        const bool same = crypto::constant_time_equal(*plaintext, e->plaintext);
        if (!same || !p.next_hop) return;
        switch (knowledge_.assess(d.transmitter, *p.next_hop)) {
            case ClaimStatus::Verified:
                ++counters_.confirmations;
                break;
            case ClaimStatus::Unverifiable:
                ++counters_.abstentions;
                break;
            case ClaimStatus::Refuted:
                return;
        }
        buffer_.erase(p.uid);
        claiming_.erase(p.uid);
        if (auto it = timers_.find(p.uid); it != timers_.end()) {
            sim_.cancel_timer(it->second);
            timers_.erase(it);
        }
    }

    // Common neighbor of sender and forwarder: watch the forwarder.
    if (!p.next_hop) return;
    const NodeId v = *p.next_hop;
    if (v == p.dst || !knowledge_.one_hop().contains(v)) return;
    if (!next_hop({v})) return;
    buffer_.insert({p.uid, *plaintext, v, p.hop_index, sim_.now() + config_.monitor_timeout, MonitorRole::Secondary,
                    p.src, p.dst, p.ttl});
    arm(p.uid, config_.monitor_timeout);
}

void NmsAgent::on_deadline(std::uint64_t uid) {
    MonitorEntry* e = buffer_.find(uid);
    if (!e) return;
    if (e->role == MonitorRole::Secondary) {
        const std::uint32_t layer = e->layer + 1;
        auto [low, inserted] = lowest_claim_.try_emplace({uid, layer}, self_);
        if (!inserted && self_ < low->second) low->second = self_;
        Packet c;
        c.uid = sim_.next_uid();
        c.kind = PacketKind::BroadcastClaim;
        c.src = self_;
        c.dst = self_;
        c.body = ClaimBody{uid, self_, layer};
        ++counters_.claims;
        claiming_.insert(uid);
        sim_.transmit(self_, std::move(c));
        sim_.schedule_timer(self_, config_.claim_settle, [this, uid] { settle(uid); });
        return;
    }

    const MonitorEntry entry = *e;
    buffer_.erase(uid);
    strike(entry.watched);
    const auto next = next_hop({entry.watched});
    if (!next) {
        ++counters_.routing_failures;
        sim_.data_ledger().lost(uid, LossCause::NoRoute);
        return;
    }
    ++counters_.reroutes;
    transmit_data(uid, entry.source, entry.destination, entry.ttl, entry.plaintext, *next, entry.layer, false);
    if (*next != entry.destination) {
        buffer_primary(uid, entry.source, entry.destination, entry.ttl, entry.plaintext, *next, entry.layer);
    }
}

void NmsAgent::settle(std::uint64_t uid) {
    if (!claiming_.erase(uid)) return;
    MonitorEntry* e = buffer_.find(uid);
    if (!e) return;
    const MonitorEntry entry = *e;
    buffer_.erase(uid);
    const std::uint32_t layer = entry.layer + 1;
    auto it = lowest_claim_.find({uid, layer});
    if (it != lowest_claim_.end() && it->second < self_) return;
    if (entry.ttl <= 1) {
        sim_.data_ledger().lost(uid, LossCause::TtlExpired);
        return;
    }
    const auto next = next_hop({entry.watched});
    if (!next) {
        ++counters_.routing_failures;
        sim_.data_ledger().lost(uid, LossCause::NoRoute);
        return;
    }
    ++counters_.promotions;
    transmit_data(uid, entry.source, entry.destination, entry.ttl - 1, entry.plaintext, *next, layer, false);
    if (*next != entry.destination) {
        buffer_primary(uid, entry.source, entry.destination, entry.ttl - 1, entry.plaintext, *next, layer);
    }
}

void NmsAgent::on_claim(const Delivery& d) {
    const auto body = std::get<ClaimBody>(d.packet.body);
    if (body.claimer == self_) return;
    const ClaimKey key{body.data_uid, body.layer};
    auto [low, inserted] = lowest_claim_.try_emplace(key, body.claimer);
    if (!inserted && body.claimer < low->second) low->second = body.claimer;

    auto relay = [&] {
        Packet c;
        c.uid = sim_.next_uid();
        c.kind = PacketKind::BroadcastClaim;
        c.src = self_;
        c.dst = self_;
        c.body = body;
        sim_.transmit(self_, std::move(c));
    };

    MonitorEntry* e = buffer_.find(body.data_uid);
    if (e && e->layer + 1 == body.layer) {
        if (e->role == MonitorRole::Secondary) {
            // A pending claimer keeps its entry only while it has the lowest id.
            if (claiming_.contains(body.data_uid) && self_ < body.claimer) return;
            claiming_.erase(body.data_uid);
        } else {
            strike(e->watched);
            relayed_claim_[key] = body.claimer;
            relay();
        }
        buffer_.erase(body.data_uid);
        if (auto it = timers_.find(body.data_uid); it != timers_.end()) {
            sim_.cancel_timer(it->second);
            timers_.erase(it);
        }
        return;
    }
    if (auto it = relayed_claim_.find(key); it != relayed_claim_.end() && body.claimer < it->second) {
        it->second = body.claimer;
        relay();
    }
}

void NmsAgent::strike(NodeId v) {
    if (blacklist_.contains(v)) return;
    if (++strikes_[v] < config_.strike_limit) return;
    blacklist_.insert(v);
    if (detections_) {
        detections_->record(DetectionEvent{sim_.now(), self_, v, {}, 0, DetectionMechanism::Nms});
    }
}

}  // namespace wsnsec::nms
