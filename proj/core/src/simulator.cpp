#include "wsnsec/core/simulator.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace wsnsec {

std::string_view to_string(LossCause cause) noexcept {
    switch (cause) {
        case LossCause::AdversaryDrop: return "adversary";
        case LossCause::ChannelDrop: return "channel";
        case LossCause::TtlExpired: return "ttl";
        case LossCause::NoRoute: return "no-route";
    }
    return "unknown";
}

void DataLedger::generated(std::uint64_t uid, NodeId source, Tick tick) {
    entries_.emplace(uid, Entry{source, tick, std::nullopt, std::nullopt, 0});
}

bool DataLedger::delivered(std::uint64_t uid, Tick tick) {
    auto it = entries_.find(uid);
    if (it == entries_.end()) return false;
    ++it->second.copies_delivered;
    if (it->second.delivered_at) return false;
    it->second.delivered_at = tick;
    return true;
}

void DataLedger::lost(std::uint64_t uid, LossCause cause) {
    auto it = entries_.find(uid);
    if (it != entries_.end()) it->second.last_loss = cause;
}

namespace {

LooseClock make_clock(std::size_t n, Tick epsilon, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "clock-offsets"));
    return LooseClock(n, epsilon, rng);
}

}  // namespace

Simulator::Simulator(Topology topology, RadioConfig config, std::uint64_t seed)
    : topology_(std::move(topology)),
      config_(config),
      seed_(seed),
      channel_rng_(derive_seed(seed, "channel")),
      clock_(make_clock(topology_.size(), config.epsilon, seed)),
      energy_(topology_.size(), config.costs),
      trace_(config.trace),
      protocols_(topology_.size()) {
    if (config_.link_drop_q < 0.0 || config_.link_drop_q > 1.0) {
        throw std::invalid_argument("link_drop_q must lie in [0,1]");
    }
    if (config_.hop_delay < 1) throw std::invalid_argument("hop_delay must be >= 1");
}

void Simulator::set_long_reach(NodeId node, double range_multiplier) {
    if (!(range_multiplier > 1.0)) throw std::invalid_argument("range multiplier must exceed 1");
    long_reach_[node.value] = topology_.reach(node, range_multiplier);
}

void Simulator::transmit(NodeId transmitter, Packet packet, bool long_reach) {
    const auto bits = packet.size_bits(config_.header_bits);
    energy_.charge(transmitter, Transmit{bits});
    ++transmissions_;
    ++per_kind_[packet.kind];
    for (auto& obs : transmit_observers_) obs(packet, transmitter, now());

    if (trace_.enabled()) {
        std::string note = "tx from=" + std::to_string(transmitter.value) + " to=";
        note += packet.next_hop ? std::to_string(packet.next_hop->value) : std::string("*");
        trace_.record(now(), packet, note);
    }

    const std::vector<NodeId>* receivers = &topology_.neighbors(transmitter);
    if (long_reach) {
        if (auto it = long_reach_.find(transmitter.value); it != long_reach_.end()) receivers = &it->second;
    }

    bool addressed_reached = !packet.next_hop.has_value();
    for (NodeId rx : *receivers) {
        const bool addressed = packet.next_hop && *packet.next_hop == rx;
        if (config_.link_drop_q > 0.0 && channel_rng_.bernoulli(config_.link_drop_q)) {
            if (trace_.enabled()) trace_.record(now(), packet, "lost-on-link to=" + std::to_string(rx.value));
            continue;
        }
        if (addressed) addressed_reached = true;
        queue_.schedule(now() + config_.hop_delay, Delivery{packet, rx, transmitter});
    }
    if (!addressed_reached && packet.kind == PacketKind::Data) ledger_.lost(packet.uid, LossCause::ChannelDrop);
}

std::uint64_t Simulator::schedule_timer(NodeId node, Tick delay, std::function<void()> callback) {
    if (delay < 0) throw std::logic_error("negative timer delay");
    const auto token = ++timer_counter_;
    timers_.emplace(token, std::move(callback));
    queue_.schedule(now() + delay, TimerFire{node, token});
    return token;
}

void Simulator::cancel_timer(std::uint64_t token) { timers_.erase(token); }

void Simulator::start_protocols() {
    if (started_) return;
    started_ = true;
    for (auto& node : protocols_) {
        for (auto& p : node) p->start();
    }
}

void Simulator::dispatch(SimEvent& event) {
    if (auto* d = std::get_if<Delivery>(&event.action)) {
        energy_.charge(d->receiver, Receive{d->packet.size_bits(config_.header_bits)});
        if (trace_.enabled()) trace_.record(now(), d->packet, "rx at=" + std::to_string(d->receiver.value));
        for (auto& obs : delivery_observers_) obs(*d, now());
        for (auto& p : protocols_[d->receiver.value]) p->on_receive(*d);
        return;
    }
    const auto& fire = std::get<TimerFire>(event.action);
    auto it = timers_.find(fire.token);
    if (it == timers_.end()) return;
    auto callback = std::move(it->second);
    timers_.erase(it);
    callback();
}

bool Simulator::step() {
    start_protocols();
    auto ev = queue_.advance();
    if (!ev) return false;
    dispatch(*ev);
    return true;
}

void Simulator::run_until(Tick end) {
    start_protocols();
    while (true) {
        auto t = queue_.next_time();
        if (!t || *t > end) break;
        auto ev = queue_.advance();
        dispatch(*ev);
    }
}

std::uint64_t Simulator::transmissions_of(PacketKind kind) const {
    auto it = per_kind_.find(kind);
    return it == per_kind_.end() ? 0 : it->second;
}

}  // namespace wsnsec
