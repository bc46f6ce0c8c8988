#include "wsnsec/routing/multipath.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace wsnsec::routing {

std::vector<std::vector<NodeId>> disjoint_gradient_paths(const Topology& topology, NodeId source, NodeId base,
                                                         std::size_t k) {
    const auto hops = topology.bfs_hops(base);
    const std::size_t n = topology.size();
    if (!hops.at(source.value) || source == base) return {};

    // Vertex v splits into in = 2v and out = 2v+1.
    const std::size_t vertices = 2 * n;
    std::vector<std::vector<std::size_t>> adj(vertices);
    std::vector<std::vector<int>> cap(vertices, std::vector<int>(vertices, 0));
    auto edge = [&](std::size_t a, std::size_t b, int c) {
        if (cap[a][b] == 0 && cap[b][a] == 0) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        cap[a][b] += c;
    };
    const int big = static_cast<int>(k) + 1;
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!hops[v]) continue;
        edge(2 * v, 2 * v + 1, (NodeId{v} == source || NodeId{v} == base) ? big : 1);
        for (NodeId w : topology.neighbors(NodeId{v})) {
            if (hops[w.value] && *hops[w.value] + 1 == *hops[v]) edge(2 * v + 1, 2 * w.value, 1);
        }
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());

    const std::size_t s = 2 * source.value, t = 2 * base.value + 1;
    std::size_t flow = 0;
    while (flow < k) {
        std::vector<std::size_t> parent(vertices, std::numeric_limits<std::size_t>::max());
        parent[s] = s;
        std::deque<std::size_t> queue{s};
        while (!queue.empty() && parent[t] == std::numeric_limits<std::size_t>::max()) {
            const auto a = queue.front();
            queue.pop_front();
            for (auto b : adj[a]) {
                if (parent[b] == std::numeric_limits<std::size_t>::max() && cap[a][b] > 0) {
                    parent[b] = a;
                    queue.push_back(b);
                }
            }
        }
        if (parent[t] == std::numeric_limits<std::size_t>::max()) break;
        for (std::size_t b = t; b != s; b = parent[b]) {
            --cap[parent[b]][b];
            ++cap[b][parent[b]];
        }
        ++flow;
    }

    // Walk saturated out->in edges from the source.
    std::vector<std::vector<NodeId>> paths;
    for (std::size_t i = 0; i < flow; ++i) {
        std::vector<NodeId> path{source};
        NodeId at = source;
        while (at != base) {
            std::optional<NodeId> step;
            for (NodeId w : topology.neighbors(at)) {
                const std::size_t a = 2 * at.value + 1, b = 2 * w.value;
                if (hops[w.value] && *hops[w.value] + 1 == *hops[at.value] && cap[b][a] > 0) {
                    --cap[b][a];
                    step = w;
                    break;
                }
            }
            if (!step) break;
            path.push_back(*step);
            at = *step;
        }
        if (at == base) paths.push_back(std::move(path));
    }
    return paths;
}

MultipathAgent::MultipathAgent(Simulator& sim, NodeId self, MultipathConfig config, adversary::Adversary* adversary)
    : sim_(sim), self_(self), config_(config), adversary_(adversary) {
    if (adversary_ && adversary_->profile().kind == adversary::AdversaryKind::HelloFlood) {
        sim_.set_long_reach(self_, adversary_->profile().range_multiplier);
    }
    paths_ = disjoint_gradient_paths(sim_.topology(), self_, config_.base_station, config_.paths);
}

void MultipathAgent::start() {
    sim_.schedule_timer(self_, config_.hello_at, [this] {
        Packet h;
        h.uid = sim_.next_uid();
        h.kind = PacketKind::Hello;
        h.src = self_;
        h.dst = self_;
        h.body = HelloBody{};
        sim_.transmit(self_, std::move(h), adversary_ && adversary_->long_reach(sim_.now()));
    });
    if (self_ == config_.base_station) {
        sim_.schedule_timer(self_, config_.beacon_at, [this] {
            beacon_sent_ = true;
            Packet b;
            b.uid = sim_.next_uid();
            b.kind = PacketKind::GradientBeacon;
            b.src = self_;
            b.dst = self_;
            b.body = GradientBody{0};
            sim_.transmit(self_, std::move(b));
        });
    }
}

void MultipathAgent::on_receive(const Delivery& d) {
    const Packet& p = d.packet;
    if (p.kind == PacketKind::GradientBeacon) {
        if (beacon_sent_) return;
        beacon_sent_ = true;
        Packet b = p;
        b.uid = sim_.next_uid();
        b.src = self_;
        auto& hops = std::get<GradientBody>(b.body).hops;
        if (auto forged = adversary_ ? adversary_->advertised_hops(sim_.now()) : std::nullopt) {
            hops = *forged;
            adversary_->log_forged_gradient(b, sim_.now());
        } else {
            ++hops;
        }
        sim_.transmit(self_, std::move(b), adversary_ && adversary_->long_reach(sim_.now()));
        return;
    }
    if (p.kind != PacketKind::Data || !p.next_hop || *p.next_hop != self_) return;
    if (self_ == p.dst) {
        sim_.data_ledger().delivered(p.uid, sim_.now());
        return;
    }
    if (p.ttl <= 1) {
        sim_.data_ledger().lost(p.uid, LossCause::TtlExpired);
        return;
    }
    Packet out = p;
    std::optional<NodeId> next = p.route_successor(self_);
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
        adversary_->maybe_tamper(out, sim_.now());
    }
    if (!next) {
        sim_.data_ledger().lost(p.uid, LossCause::NoRoute);
        return;
    }
    out.next_hop = *next;
    out.ttl = p.ttl - 1;
    ++out.hop_index;
    sim_.transmit(self_, std::move(out));
}

std::uint64_t MultipathAgent::send_data(Bytes payload) {
    const std::uint64_t uid = sim_.next_uid();
    sim_.data_ledger().generated(uid, self_, sim_.now());
    if (paths_.empty()) {
        sim_.data_ledger().lost(uid, LossCause::NoRoute);
        return uid;
    }
    for (const auto& path : paths_) {
        Packet p;
        p.uid = uid;
        p.kind = PacketKind::Data;
        p.src = self_;
        p.dst = config_.base_station;
        p.next_hop = path.at(1);
        p.route = path;
        p.payload = payload;
        sim_.transmit(self_, std::move(p));
    }
    return uid;
}

}  // namespace wsnsec::routing
