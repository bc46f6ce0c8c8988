#include "wsnsec/routing/aodv.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace wsnsec::routing {

namespace {

bool has_duplicates(const std::vector<NodeId>& path) {
    std::unordered_set<NodeId> seen;
    for (NodeId n : path) {
        if (!seen.insert(n).second) return true;
    }
    return false;
}

bool contains(const std::vector<NodeId>& v, NodeId n) { return std::find(v.begin(), v.end(), n) != v.end(); }

}  // namespace

std::string_view to_string(FrqOutcome o) noexcept {
    switch (o) {
        case FrqOutcome::Trusted: return "trusted";
        case FrqOutcome::Flagged: return "flagged";
        case FrqOutcome::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

bool Route::contains(NodeId n) const { return routing::contains(path, n); }

RouteTable::RouteTable(NodeId self) : self_(self), self_route_{{self}, 0, 0} {}

void RouteTable::install(NodeId dst, std::vector<NodeId> path, Tick expires, std::uint32_t seq) {
    if (path.empty() || path.front() != self_ || path.back() != dst) {
        throw std::invalid_argument("route path must run from the owner to the destination");
    }
    if (dst == self_) return;
    routes_[dst] = Route{std::move(path), expires, seq};
}

const Route* RouteTable::lookup(NodeId dst, Tick now) const {
    if (dst == self_) return &self_route_;
    auto it = routes_.find(dst);
    if (it == routes_.end() || it->second.expires <= now) return nullptr;
    return &it->second;
}

void RouteTable::erase(NodeId dst) { routes_.erase(dst); }

std::size_t RouteTable::purge_containing(NodeId node) {
    return std::erase_if(routes_, [&](const auto& kv) { return kv.second.contains(node); });
}

AodvAgent::AodvAgent(Simulator& sim, NodeId self, AodvConfig config, adversary::Adversary* adversary,
                     DetectionLog* detections)
    : sim_(sim), self_(self), config_(config), adversary_(adversary), detections_(detections), routes_(self) {}

std::vector<NodeId> AodvAgent::avoid_with_blacklist(std::vector<NodeId> avoid) const {
    for (NodeId b : blacklist_) {
        if (!contains(avoid, b)) avoid.push_back(b);
    }
    return avoid;
}

bool AodvAgent::acceptable(const std::vector<NodeId>& path, const std::vector<NodeId>& avoid) const {
    if (has_duplicates(path)) return false;
    for (NodeId n : path) {
        if (contains(avoid, n) || blacklist_.contains(n)) return false;
    }
    return true;
}

void AodvAgent::blacklist(NodeId node) {
    if (node == self_) return;
    blacklist_.insert(node);
    routes_.purge_containing(node);
}

void AodvAgent::discover(NodeId target, DiscoveryOptions options, DiscoveryCallback done) {
    options.avoid = avoid_with_blacklist(std::move(options.avoid));
    if (options.use_cache && !options.ask_only && !options.neighbors_only) {
        const Route* r = routes_.lookup(target, sim_.now());
        if (r && acceptable(r->path, options.avoid)) {
            DiscoveryResult res{r->path, target};
            sim_.schedule_timer(self_, 0, [done = std::move(done), res = std::move(res)] { done(res); });
            return;
        }
    }
    start_attempt(PendingDiscovery{target, std::move(options), std::move(done), 0, 0});
}

void AodvAgent::start_attempt(PendingDiscovery pending) {
    const std::uint32_t rid = ++request_counter_;
    ++pending.attempts;
    const bool local = pending.options.neighbors_only || pending.options.ask_only.has_value();

    Packet p;
    p.uid = sim_.next_uid();
    p.kind = PacketKind::Rreq;
    p.src = self_;
    p.dst = pending.target;
    p.next_hop = pending.options.ask_only;
    p.body = RreqBody{self_, rid, pending.target, {self_}, pending.options.avoid, local};
    seen_requests_.insert({self_, rid});

    pending.timer = sim_.schedule_timer(self_, local ? config_.local_timeout : config_.discovery_timeout, [this, rid] {
        auto it = discoveries_.find(rid);
        if (it == discoveries_.end()) return;
        PendingDiscovery expired = std::move(it->second);
        discoveries_.erase(it);
        const bool local_req = expired.options.neighbors_only || expired.options.ask_only.has_value();
        if (!local_req && expired.attempts <= config_.discovery_retries) {
            start_attempt(std::move(expired));
        } else {
            expired.done(std::nullopt);
        }
    });
    discoveries_.emplace(rid, std::move(pending));
    sim_.transmit(self_, std::move(p));
}

void AodvAgent::on_receive(const Delivery& d) {
    const Packet& p = d.packet;
    const bool addressed = !p.next_hop || *p.next_hop == self_;
    if (!addressed) {
        for (auto& l : overhear_listeners_) l(d);
        return;
    }
    if (p.kind == PacketKind::Rreq) {
        handle_rreq(d);
        return;
    }
    if (p.is_broadcast()) {
        if (auto it = local_handlers_.find(p.kind); it != local_handlers_.end()) it->second(d);
        return;
    }
    if (p.dst != self_) {
        if (!p.route.empty()) relay(d);
        return;
    }
    switch (p.kind) {
        case PacketKind::Rrep: handle_rrep(d); return;
        case PacketKind::FRq: handle_frq(d); return;
        case PacketKind::FRp: handle_frp(d); return;
        case PacketKind::Data:
            sim_.data_ledger().delivered(p.uid, sim_.now());
            break;
        default: break;
    }
    if (auto it = local_handlers_.find(p.kind); it != local_handlers_.end()) it->second(d);
}

void AodvAgent::learn_reverse(const std::vector<NodeId>& path_in) {
    if (path_in.empty()) return;
    std::vector<NodeId> back{self_};
    back.insert(back.end(), path_in.rbegin(), path_in.rend());
    if (has_duplicates(back)) return;
    for (NodeId n : back) {
        if (blacklist_.contains(n)) return;
    }
    const NodeId origin = path_in.front();
    const Route* existing = routes_.lookup(origin, sim_.now());
    if (existing && existing->hop_count() <= back.size() - 1) return;
    routes_.install(origin, std::move(back), sim_.now() + config_.route_ttl);
}

void AodvAgent::handle_rreq(const Delivery& d) {
    const auto& req = std::get<RreqBody>(d.packet.body);
    if (req.origin == self_) return;
    if (!seen_requests_.insert({req.origin, req.request_id}).second) return;

    const Tick now = sim_.now();
    if (adversary_ && adversary_->forges_routes(now) && req.target != self_) {
        auto claimed = req.path;
        const auto suffix = adversary_->forged_suffix(req.target);
        claimed.insert(claimed.end(), suffix.begin(), suffix.end());
        reply(req, std::move(claimed), true);
        return;
    }

    if (contains(req.avoid, self_)) return;
    learn_reverse(req.path);

    auto claimed = req.path;
    claimed.push_back(self_);
    if (req.target == self_) {
        reply(req, std::move(claimed), false);
        return;
    }
    if (req.neighbors_only && sim_.topology().adjacent(self_, req.target)) {
        claimed.push_back(req.target);
        reply(req, std::move(claimed), false);
        return;
    }
    if (const Route* r = routes_.lookup(req.target, now)) {
        auto composite = req.path;
        composite.insert(composite.end(), r->path.begin(), r->path.end());
        if (!has_duplicates(composite) &&
            std::none_of(composite.begin(), composite.end(), [&](NodeId n) { return contains(req.avoid, n); })) {
            reply(req, std::move(composite), false);
            return;
        }
    }
    if (req.neighbors_only || req.path.size() >= config_.data_ttl) return;

    Packet fwd = d.packet;
    auto& body = std::get<RreqBody>(fwd.body);
    body.path.push_back(self_);
    fwd.next_hop.reset();
    fwd.hop_index += 1;
    sim_.transmit(self_, std::move(fwd));
}

void AodvAgent::reply(const RreqBody& req, std::vector<NodeId> claimed_path, bool forged) {
    Packet p;
    p.uid = sim_.next_uid();
    p.kind = PacketKind::Rrep;
    p.src = self_;
    p.dst = req.origin;
    p.route.push_back(self_);
    p.route.insert(p.route.end(), req.path.rbegin(), req.path.rend());
    const std::uint32_t seq = req.target == self_ ? ++own_seq_ : 0;
    p.body = RrepBody{req.origin, req.request_id, req.target, self_, std::move(claimed_path), seq};
    if (forged && adversary_) adversary_->log_forged_rrep(p, sim_.now());
    send_routed(std::move(p));
}

void AodvAgent::handle_rrep(const Delivery& d) {
    const auto& rep = std::get<RrepBody>(d.packet.body);
    auto it = discoveries_.find(rep.request_id);
    if (it == discoveries_.end()) return;
    PendingDiscovery& pending = it->second;
    if (pending.options.accept_from && rep.responder != *pending.options.accept_from) return;
    const auto& path = rep.path;
    if (path.size() < 2 || path.front() != self_ || path.back() != pending.target) return;
    // The next hop must be the node that actually handed us the reply.
    if (path[1] != d.transmitter) return;
    if (!acceptable(path, pending.options.avoid)) return;

    PendingDiscovery done = std::move(pending);
    discoveries_.erase(it);
    sim_.cancel_timer(done.timer);
    if (done.options.install) routes_.install(done.target, path, sim_.now() + config_.route_ttl, rep.target_seq);
    done.done(DiscoveryResult{path, rep.responder});
}

void AodvAgent::relay(const Delivery& d) {
    Packet p = d.packet;
    auto next = p.route_successor(self_);
    if (!next) return;
    const bool data = p.kind == PacketKind::Data;
    if (p.ttl <= 1) {
        if (data) sim_.data_ledger().lost(p.uid, LossCause::TtlExpired);
        return;
    }
    p.ttl -= 1;
    if (adversary_) {
        switch (adversary_->on_data(p, sim_.now())) {
            case adversary::Adversary::DataVerdict::Drop:
                if (data) sim_.data_ledger().lost(p.uid, LossCause::AdversaryDrop);
                return;
            case adversary::Adversary::DataVerdict::Misaddress:
                next = adversary_->profile().misaddress_to;
                break;
            case adversary::Adversary::DataVerdict::Forward:
                if (is_data_plane(p.kind) && !sim_.topology().adjacent(self_, *next)) {
                    // The route ends in a link we invented; deliver over a real one.
                    adversary_->maybe_tamper(p, sim_.now());
                    p.hop_index += 1;
                    forward_own(std::move(p));
                    return;
                }
                break;
        }
        if (is_data_plane(p.kind)) adversary_->maybe_tamper(p, sim_.now());
    }
    for (auto& l : relay_listeners_) l(p, d.transmitter, *next);
    p.hop_index += 1;
    p.next_hop = *next;
    transmit_unicast(std::move(p));
}

void AodvAgent::forward_own(Packet packet) {
    const NodeId dst = packet.dst;
    packet.route.clear();
    pending_data_[dst].push_back(std::move(packet));
    if (routes_.lookup(dst, sim_.now())) {
        flush(dst);
    } else {
        discover_for_data(dst);
    }
}

void AodvAgent::send_routed(Packet packet) {
    if (packet.route.size() < 2 || packet.route.front() != self_) {
        throw std::invalid_argument("source route must start at the sender and name a next hop");
    }
    packet.next_hop = packet.route[1];
    transmit_unicast(std::move(packet));
}

void AodvAgent::transmit_unicast(Packet packet) {
    for (auto& l : unicast_listeners_) l(packet);
    sim_.transmit(self_, std::move(packet));
}

std::uint64_t AodvAgent::send_data(NodeId dst, Bytes payload) {
    Packet p;
    p.uid = sim_.next_uid();
    p.kind = PacketKind::Data;
    p.src = self_;
    p.dst = dst;
    p.ttl = config_.data_ttl;
    p.payload = std::move(payload);
    sim_.data_ledger().generated(p.uid, self_, sim_.now());
    const auto uid = p.uid;
    if (dst == self_) {
        sim_.data_ledger().delivered(uid, sim_.now());
        return uid;
    }
    pending_data_[dst].push_back(std::move(p));
    if (routes_.lookup(dst, sim_.now())) {
        flush(dst);
    } else {
        discover_for_data(dst);
    }
    return uid;
}

void AodvAgent::flush(NodeId dst) {
    const Route* r = routes_.lookup(dst, sim_.now());
    if (!r) return;
    auto queue = std::move(pending_data_[dst]);
    pending_data_.erase(dst);
    for (auto& p : queue) {
        p.route = r->path;
        send_routed(std::move(p));
    }
}

void AodvAgent::fail_pending(NodeId dst) {
    auto it = pending_data_.find(dst);
    if (it == pending_data_.end()) return;
    for (const auto& p : it->second) sim_.data_ledger().lost(p.uid, LossCause::NoRoute);
    pending_data_.erase(it);
}

void AodvAgent::discover_for_data(NodeId dst) {
    if (!data_discovery_active_.insert(dst).second) return;
    DiscoveryOptions opts;
    opts.avoid = frq_extra_avoid_[dst];
    opts.install = !config_.frq_check;
    discover(dst, opts, [this, dst](std::optional<DiscoveryResult> res) {
        if (!res) {
            data_discovery_active_.erase(dst);
            frq_extra_avoid_.erase(dst);
            frq_attempts_.erase(dst);
            fail_pending(dst);
            return;
        }
        if (config_.frq_check && res->responder != dst && res->path.size() >= 3) {
            run_frq(dst, std::move(*res));
            return;
        }
        if (config_.frq_check) routes_.install(dst, res->path, sim_.now() + config_.route_ttl);
        data_discovery_active_.erase(dst);
        frq_extra_avoid_.erase(dst);
        frq_attempts_.erase(dst);
        flush(dst);
    });
}

void AodvAgent::run_frq(NodeId dst, DiscoveryResult result) {
    const auto& path = result.path;
    auto pos = std::find(path.begin(), path.end(), result.responder);
    if (pos == path.end() || std::next(pos) == path.end()) {
        // Responder outside its own claimed path: nothing to cross-check.
        routes_.install(dst, path, sim_.now() + config_.route_ttl);
        data_discovery_active_.erase(dst);
        flush(dst);
        return;
    }
    const NodeId b1 = result.responder;
    const NodeId b2 = *std::next(pos);
    const std::uint32_t qid = ++query_counter_;
    frq_pending_.emplace(qid, PendingFrq{dst, std::move(result), b1, b2, 0});

    DiscoveryOptions opts;
    opts.avoid = {b1};
    opts.install = false;
    discover(b2, opts, [this, qid](std::optional<DiscoveryResult> route_to_b2) {
        auto it = frq_pending_.find(qid);
        if (it == frq_pending_.end()) return;
        if (!route_to_b2) {
            finish_frq(it->second.dst, qid, FrqOutcome::Inconclusive);
            return;
        }
        Packet q;
        q.uid = sim_.next_uid();
        q.kind = PacketKind::FRq;
        q.src = self_;
        q.dst = it->second.b2;
        q.route = route_to_b2->path;
        q.body = FurtherRequestBody{qid, self_, it->second.b1, it->second.dst};
        it->second.timer = sim_.schedule_timer(self_, config_.frp_timeout, [this, qid] {
            auto jt = frq_pending_.find(qid);
            if (jt != frq_pending_.end()) finish_frq(jt->second.dst, qid, FrqOutcome::Inconclusive);
        });
        send_routed(std::move(q));
    });
}

void AodvAgent::handle_frq(const Delivery& d) {
    const auto& q = std::get<FurtherRequestBody>(d.packet.body);
    auto respond = [this, route = d.packet.route, q](bool about, bool dest, bool forged) {
        Packet r;
        r.uid = sim_.next_uid();
        r.kind = PacketKind::FRp;
        r.src = self_;
        r.dst = q.asker;
        r.route.assign(route.rbegin(), route.rend());
        r.body = FurtherReplyBody{q.query_id, about, dest};
        if (forged && adversary_) adversary_->log_forged_frp(r, sim_.now());
        send_routed(std::move(r));
    };
    const Tick now = sim_.now();
    if (adversary_ && adversary_->answers_frq_yes(now)) {
        respond(true, true, true);
        return;
    }
    const auto& topo = sim_.topology();
    const bool about = topo.adjacent(self_, q.about) || routes_.lookup(q.about, now) != nullptr;
    const bool dest = self_ == q.destination || topo.adjacent(self_, q.destination) ||
                      routes_.lookup(q.destination, now) != nullptr;
    if (dest) {
        respond(about, true, false);
        return;
    }
    DiscoveryOptions opts;
    discover(q.destination, opts, [respond, about](std::optional<DiscoveryResult> res) {
        respond(about, res.has_value(), false);
    });
}

void AodvAgent::handle_frp(const Delivery& d) {
    const auto& r = std::get<FurtherReplyBody>(d.packet.body);
    auto it = frq_pending_.find(r.query_id);
    if (it == frq_pending_.end()) return;
    sim_.cancel_timer(it->second.timer);
    const bool trusted = r.has_route_to_about && r.has_route_to_destination;
    finish_frq(it->second.dst, r.query_id, trusted ? FrqOutcome::Trusted : FrqOutcome::Flagged);
}

void AodvAgent::finish_frq(NodeId dst, std::uint32_t query_id, FrqOutcome outcome) {
    auto it = frq_pending_.find(query_id);
    if (it == frq_pending_.end()) return;
    PendingFrq pending = std::move(it->second);
    frq_pending_.erase(it);
    sim_.cancel_timer(pending.timer);
    const Tick now = sim_.now();
    frq_verdicts_.push_back(FrqVerdict{now, pending.b1, pending.b2, dst, outcome});
    data_discovery_active_.erase(dst);

    if (outcome == FrqOutcome::Trusted) {
        routes_.install(dst, pending.candidate.path, now + config_.route_ttl);
        frq_extra_avoid_.erase(dst);
        frq_attempts_.erase(dst);
        flush(dst);
        return;
    }
    if (outcome == FrqOutcome::Flagged) {
        if (detections_) detections_->record({now, self_, pending.b1, {pending.b2}, query_id, DetectionMechanism::FrqFrp});
        blacklist(pending.b1);
    } else {
        frq_extra_avoid_[dst].push_back(pending.b1);
    }
    if (++frq_attempts_[dst] >= config_.frq_attempts) {
        frq_attempts_.erase(dst);
        frq_extra_avoid_.erase(dst);
        fail_pending(dst);
        return;
    }
    discover_for_data(dst);
}

}  // namespace wsnsec::routing
