#include "wsnsec/detect/dri.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace wsnsec::detect {

std::optional<double> DriEntry::rts_cts_ratio() const noexcept {
    if (cts_count == 0) return std::nullopt;
    return static_cast<double>(rts_count) / static_cast<double>(cts_count);
}

DriTable::DriTable(const std::vector<NodeId>& neighbors) {
    for (NodeId n : neighbors) entries_.emplace(n, DriEntry{});
}

DriEntry& DriTable::mutable_at(NodeId neighbor) {
    auto it = entries_.find(neighbor);
    if (it == entries_.end()) {
        throw std::invalid_argument("node " + std::to_string(neighbor.value) + " is not a neighbor");
    }
    return it->second;
}

const DriEntry& DriTable::at(NodeId neighbor) const {
    auto it = entries_.find(neighbor);
    if (it == entries_.end()) {
        throw std::invalid_argument("node " + std::to_string(neighbor.value) + " is not a neighbor");
    }
    return it->second;
}

void DriTable::record(NodeId neighbor, Direction direction) {
    auto& e = mutable_at(neighbor);
    (direction == Direction::From ? e.from : e.through) = true;
}

void DriTable::record_rts_cts(NodeId neighbor, Handshake which) {
    auto& e = mutable_at(neighbor);
    ++(which == Handshake::Rts ? e.rts_count : e.cts_count);
}

void DriTable::set_check_bit(NodeId neighbor, Tick now) {
    auto& e = mutable_at(neighbor);
    e.check_bit = true;
    e.cleared_at = now;
}

std::vector<NodeId> select_suspects(const DriTable& table, Tick now, Tick threshold_interval,
                                    const std::set<NodeId>& exclude) {
    std::vector<NodeId> out;
    for (const auto& [n, e] : table.entries()) {
        if (e.from || e.through || exclude.contains(n)) continue;
        if (e.cleared_at && now - *e.cleared_at < threshold_interval) continue;
        out.push_back(n);
    }
    return out;
}

std::optional<NodeId> select_cooperative_node(const DriTable& table, const std::vector<NodeId>& suspects,
                                              const std::set<NodeId>& exclude) {
    std::optional<NodeId> best;
    int best_score = 0;
    for (const auto& [n, e] : table.entries()) {
        if (exclude.contains(n) || std::find(suspects.begin(), suspects.end(), n) != suspects.end()) continue;
        const int score = int(e.from) + int(e.through);
        if (score > best_score) {  // ascending map order keeps the lowest id on ties
            best = n;
            best_score = score;
        }
    }
    return best;
}

std::map<NodeId, bool> ProbeCheckTable::statuses() const {
    std::map<NodeId, bool> out;
    for (NodeId n : notified_) out[n] = probes_.contains(n);
    return out;
}

std::vector<NodeId> ProbeCheckTable::flagged() const {
    std::vector<NodeId> out;
    for (NodeId n : notified_) {
        if (!probes_.contains(n)) out.push_back(n);
    }
    return out;
}

bool blacklist_update(std::set<NodeId>& blacklist, const SuspicionVerdict& verdict) {
    if (verdict.flagged.empty()) return false;
    return blacklist.insert(verdict.suspect).second;
}

std::string_view to_string(LocalOutcome o) noexcept {
    switch (o) {
        case LocalOutcome::Cleared: return "cleared";
        case LocalOutcome::Escalated: return "escalated";
        case LocalOutcome::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

DriAgent::DriAgent(Simulator& sim, routing::AodvAgent& aodv, DriConfig config, adversary::Adversary* adversary,
                   DetectionLog* detections)
    : sim_(sim),
      aodv_(aodv),
      self_(aodv.self()),
      config_(config),
      adversary_(adversary),
      detections_(detections),
      table_(sim.topology().neighbors(aodv.self())) {
    aodv_.add_relay_listener([this](const Packet& p, NodeId from, NodeId to) {
        if (p.kind != PacketKind::Data) return;
        if (table_.contains(from)) table_.record(from, Direction::From);
        if (table_.contains(to)) table_.record(to, Direction::Through);
    });
    aodv_.add_unicast_listener([this](const Packet& p) {
        if (!is_data_plane(p.kind) || !p.next_hop || *p.next_hop == p.dst) return;
        if (!table_.contains(*p.next_hop)) return;
        table_.record_rts_cts(*p.next_hop, Handshake::Rts);
        handed_to_[p.uid] = *p.next_hop;
    });
    aodv_.add_overhear_listener([this](const Delivery& d) {
        auto it = handed_to_.find(d.packet.uid);
        if (it == handed_to_.end() || it->second != d.transmitter) return;
        table_.record_rts_cts(d.transmitter, Handshake::Cts);
        handed_to_.erase(it);
    });
    aodv_.set_local_handler(PacketKind::CoopDetectRequest, [this](const Delivery& d) { on_coop_request(d); });
    aodv_.set_local_handler(PacketKind::FurtherProbe, [this](const Delivery& d) { on_further_probe(d); });
    aodv_.set_local_handler(PacketKind::Notification, [this](const Delivery& d) { on_notification(d); });
    aodv_.set_local_handler(PacketKind::Probe, [this](const Delivery& d) { on_probe(d); });
    aodv_.set_local_handler(PacketKind::ProbeQuery, [this](const Delivery& d) { on_probe_query(d); });
    aodv_.set_local_handler(PacketKind::ProbeReply, [this](const Delivery& d) { on_probe_reply(d); });
}

void DriAgent::start() {
    if (config_.scanning) schedule_scan();
}

void DriAgent::schedule_scan() {
    sim_.schedule_timer(self_, config_.threshold_interval, [this] {
        scan();
        schedule_scan();
    });
}

void DriAgent::scan() {
    // A compromised node does not report on its neighbors.
    if (adversary_ && adversary_->active(sim_.now())) return;
    std::set<NodeId> exclude = aodv_.blacklist_set();
    exclude.insert(in_progress_.begin(), in_progress_.end());
    const auto suspects = select_suspects(table_, sim_.now(), config_.threshold_interval, exclude);
    if (suspects.empty()) return;
    const auto cn = select_cooperative_node(table_, suspects, aodv_.blacklist_set());
    for (NodeId s : suspects) {
        if (cn) {
            start_local_check(s, *cn);
        } else {
            start_cooperative(s);
        }
    }
}

void DriAgent::send_avoiding(Packet packet, NodeId avoid) {
    if (sim_.topology().adjacent(self_, packet.dst)) {
        packet.route = {self_, packet.dst};
        aodv_.send_routed(std::move(packet));
        return;
    }
    routing::DiscoveryOptions opts;
    opts.avoid = {avoid};
    opts.install = false;
    const NodeId dst = packet.dst;
    aodv_.discover(dst, opts, [this, packet = std::move(packet)](std::optional<routing::DiscoveryResult> res) mutable {
        if (!res) return;
        packet.route = res->path;
        aodv_.send_routed(std::move(packet));
    });
}

void DriAgent::start_local_check(NodeId suspect, NodeId cooperative) {
    in_progress_.insert(suspect);
    const std::uint32_t id = ++round_counter_;
    local_.emplace(id, LocalCheck{suspect, cooperative, 0, 0});

    routing::DiscoveryOptions opts;
    opts.neighbors_only = true;
    opts.accept_from = suspect;
    opts.use_cache = false;
    opts.install = false;
    aodv_.discover(cooperative, opts, [this, id](std::optional<routing::DiscoveryResult> res) {
        auto it = local_.find(id);
        if (it == local_.end()) return;
        if (!res) {
            finish_local(id, LocalOutcome::Inconclusive);
            return;
        }
        Packet probe;
        probe.uid = sim_.next_uid();
        probe.kind = PacketKind::Probe;
        probe.src = self_;
        probe.dst = it->second.cooperative;
        probe.route = res->path;
        probe.body = ProbeBody{id, self_, 0};
        it->second.probe_uid = probe.uid;
        const Tick wait = 2 * static_cast<Tick>(res->path.size() - 1) + config_.probe_slack;
        aodv_.send_routed(std::move(probe));

        it->second.timer = sim_.schedule_timer(self_, wait, [this, id] {
            auto jt = local_.find(id);
            if (jt == local_.end()) return;
            Packet q;
            q.uid = sim_.next_uid();
            q.kind = PacketKind::ProbeQuery;
            q.src = self_;
            q.dst = jt->second.cooperative;
            q.body = ProbeQueryBody{id, jt->second.suspect, jt->second.probe_uid, false};
            jt->second.timer = sim_.schedule_timer(self_, config_.query_timeout,
                                                   [this, id] { finish_local(id, LocalOutcome::Inconclusive); });
            send_avoiding(std::move(q), jt->second.suspect);
        });
    });
}

void DriAgent::on_probe(const Delivery& d) { probes_received_.insert(d.packet.uid); }

void DriAgent::on_probe_query(const Delivery& d) {
    auto body = std::get<ProbeQueryBody>(d.packet.body);
    body.received = probes_received_.contains(body.probe_uid);
    Packet r;
    r.uid = sim_.next_uid();
    r.kind = PacketKind::ProbeReply;
    r.src = self_;
    r.dst = d.packet.src;
    r.route.assign(d.packet.route.rbegin(), d.packet.route.rend());
    r.body = body;
    aodv_.send_routed(std::move(r));
}

void DriAgent::on_probe_reply(const Delivery& d) {
    const auto& body = std::get<ProbeQueryBody>(d.packet.body);
    auto it = local_.find(body.round_id);
    if (it == local_.end()) return;
    if (body.received) {
        table_.set_check_bit(it->second.suspect, sim_.now());
        finish_local(body.round_id, LocalOutcome::Cleared);
    } else {
        finish_local(body.round_id, LocalOutcome::Escalated);
    }
}

void DriAgent::finish_local(std::uint32_t check_id, LocalOutcome outcome) {
    auto it = local_.find(check_id);
    if (it == local_.end()) return;
    const LocalCheck check = it->second;
    local_.erase(it);
    sim_.cancel_timer(check.timer);
    const LocalCheckRecord rec{sim_.now(), check.suspect, check.cooperative, outcome};
    local_checks_.push_back(rec);
    for (auto& l : local_listeners_) l(rec);
    if (outcome == LocalOutcome::Escalated) {
        start_cooperative(check.suspect);
    } else {
        in_progress_.erase(check.suspect);
    }
}

std::uint32_t DriAgent::start_cooperative(NodeId suspect) {
    in_progress_.insert(suspect);
    const std::uint32_t id = ++round_counter_;
    rounds_.emplace(id, Round{suspect, sim_.now(), {}});
    for (NodeId x : sim_.topology().neighbors(suspect)) {
        if (x == self_ || aodv_.blacklisted(x)) continue;
        Packet req;
        req.uid = sim_.next_uid();
        req.kind = PacketKind::CoopDetectRequest;
        req.src = self_;
        req.dst = x;
        req.body = CoopRequestBody{id, self_, suspect};
        send_avoiding(std::move(req), suspect);
    }
    sim_.schedule_timer(self_, config_.round_timeout, [this, id] { finish_round(id); });
    return id;
}

void DriAgent::on_coop_request(const Delivery& d) {
    if (adversary_ && adversary_->ignores_cooperation(sim_.now())) return;
    const auto req = std::get<CoopRequestBody>(d.packet.body);
    if (req.suspect == self_ || req.initiator == self_) return;
    if (!joined_rounds_.insert({req.initiator, req.round_id}).second) return;

    auto notify = [this, req] {
        Packet n;
        n.uid = sim_.next_uid();
        n.kind = PacketKind::Notification;
        n.src = self_;
        n.dst = req.initiator;
        n.body = req;
        send_avoiding(std::move(n), req.suspect);
    };

    routing::DiscoveryOptions opts;
    opts.ask_only = req.suspect;
    opts.neighbors_only = true;
    opts.accept_from = req.suspect;
    opts.use_cache = false;
    opts.install = false;
    aodv_.discover(req.initiator, opts, [this, req, notify](std::optional<routing::DiscoveryResult> res) {
        if (!res) {
            // The suspect refused to offer a route; report that no probe went out.
            notify();
            return;
        }
        for (std::uint32_t k = 0; k < config_.further_probes; ++k) {
            sim_.schedule_timer(self_, static_cast<Tick>(k) * config_.probe_spacing, [this, req, k, path = res->path] {
                Packet p;
                p.uid = sim_.next_uid();
                p.kind = PacketKind::FurtherProbe;
                p.src = self_;
                p.dst = req.initiator;
                p.route = path;
                p.body = ProbeBody{req.round_id, req.initiator, static_cast<std::uint8_t>(k)};
                aodv_.send_routed(std::move(p));
            });
        }
        const Tick last = static_cast<Tick>(config_.further_probes > 0 ? config_.further_probes - 1 : 0) *
                          config_.probe_spacing;
        sim_.schedule_timer(self_, last, notify);
    });
}

void DriAgent::on_further_probe(const Delivery& d) {
    const auto& body = std::get<ProbeBody>(d.packet.body);
    if (body.initiator != self_) return;
    if (auto it = rounds_.find(body.round_id); it != rounds_.end()) it->second.table.record_probe(d.packet.src);
}

void DriAgent::on_notification(const Delivery& d) {
    const auto& body = std::get<CoopRequestBody>(d.packet.body);
    if (body.initiator != self_) return;
    if (auto it = rounds_.find(body.round_id); it != rounds_.end()) it->second.table.record_notification(d.packet.src);
}

void DriAgent::finish_round(std::uint32_t round_id) {
    auto it = rounds_.find(round_id);
    if (it == rounds_.end()) return;
    Round round = std::move(it->second);
    rounds_.erase(it);
    SuspicionVerdict v{self_, round.suspect, round_id, round.started, sim_.now(), round.table.statuses(),
                       round.table.flagged()};
    if (config_.blacklist_on_flag && !v.flagged.empty()) {
        const bool fresh = !aodv_.blacklisted(round.suspect);
        aodv_.blacklist(round.suspect);
        if (fresh && detections_) {
            detections_->record({sim_.now(), self_, round.suspect, v.flagged, round_id, DetectionMechanism::Dri});
        }
    }
    in_progress_.erase(round.suspect);
    verdicts_.push_back(v);
    for (auto& l : verdict_listeners_) l(v);
}

}  // namespace wsnsec::detect
