#include "wsnsec/harness/run.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <set>
#include <thread>

#include "wsnsec/auth/merkle.hpp"
#include "wsnsec/auth/mutesla.hpp"
#include "wsnsec/auth/snep.hpp"
#include "wsnsec/routing/multipath.hpp"

namespace wsnsec::harness {

using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// ---------------------------------------------------------------------------
// μTESLA overlay: the base station floods authenticated broadcasts and later
// discloses each interval key; compromised nodes inject forged broadcasts.

struct MuteslaStats {
    std::uint64_t released = 0;
    std::uint64_t rejected_unsafe = 0;
    std::uint64_t forged_accepted = 0;
    std::set<std::uint64_t> forged;
};

class MuteslaOverlay : public Protocol {
public:
    MuteslaOverlay(Simulator& sim, NodeId self, const Scenario& s, const auth::KeyChain& chain,
                   adversary::Adversary* adversary, MuteslaStats& stats)
        : sim_(sim),
          self_(self),
          base_(s.base_station),
          settings_(s.mutesla),
          duration_(s.duration),
          crypto_cost_(s.constants.crypto_instructions),
          chain_(chain),
          adversary_(adversary),
          stats_(stats),
          receiver_(chain.commitment(), chain.params(), s.epsilon) {}

    void start() override {
        const auto len = settings_.interval_len;
        for (std::uint32_t i = 1; i <= chain_.length(); ++i) {
            const Tick send_at = static_cast<Tick>(i) * len + 1;
            if (send_at >= duration_) break;
            if (self_ == base_) {
                sim_.schedule_timer(self_, send_at, [this, i] { send_broadcast(i); });
                const Tick disclose_at = static_cast<Tick>(i + settings_.disclosure_lag) * len;
                const bool dropped = std::find(settings_.drop_disclosures.begin(), settings_.drop_disclosures.end(),
                                               i) != settings_.drop_disclosures.end();
                if (!dropped && disclose_at < duration_) {
                    sim_.schedule_timer(self_, disclose_at, [this, i] { send_disclosure(i); });
                }
            } else if (adversary_ != nullptr) {
                sim_.schedule_timer(self_, send_at + 1, [this, i] { forge(i); });
            }
        }
    }

    void on_receive(const Delivery& d) override {
        const Packet& p = d.packet;
        if (p.kind != PacketKind::AuthBroadcast && p.kind != PacketKind::KeyDisclosure) return;
        if (!seen_.insert(p.uid).second) return;
        if (self_ != base_) {
            if (p.kind == PacketKind::AuthBroadcast) {
                accept(p);
            } else {
                disclose(std::get<DisclosureBody>(p.body));
            }
        }
        Packet relay = p;
        relay.next_hop.reset();
        sim_.transmit(self_, std::move(relay));
    }

private:
    void send_broadcast(std::uint32_t interval) {
        Bytes payload{'c', 'm', 'd', static_cast<std::uint8_t>(interval & 0xFF)};
        auto p = auth::auth_broadcast(chain_, payload, sim_.now(), self_, sim_.next_uid());
        seen_.insert(p.uid);
        sim_.charge_compute(self_, crypto_cost_);
        sim_.transmit(self_, std::move(p));
    }

    void send_disclosure(std::uint32_t interval) {
        Packet p;
        p.uid = sim_.next_uid();
        p.kind = PacketKind::KeyDisclosure;
        p.src = self_;
        p.dst = self_;
        p.body = DisclosureBody{interval, chain_.key(interval).bytes};
        seen_.insert(p.uid);
        sim_.transmit(self_, std::move(p));
    }

    void forge(std::uint32_t interval) {
        if (!adversary_->active(sim_.now())) return;
        Packet p;
        p.uid = sim_.next_uid();
        p.kind = PacketKind::AuthBroadcast;
        p.src = base_;
        p.dst = base_;
        p.payload = Bytes{'f', 'a', 'k', 'e'};
        p.counter = interval;
        // Without the undisclosed key the best an attacker can do is guess.
        std::array<std::uint8_t, 16> guess{};
        const auto h = crypto::hash("forged:" + std::to_string(p.uid));
        std::copy_n(h.bytes.begin(), guess.size(), guess.begin());
        p.tag = guess;
        stats_.forged.insert(p.uid);
        seen_.insert(p.uid);
        sim_.transmit(self_, std::move(p));
    }

    void accept(const Packet& p) {
        if (!p.counter) return;
        const auto interval = static_cast<std::uint32_t>(*p.counter);
        if (receiver_.receiver_accept(p, interval, sim_.local_time(self_)) == auth::AcceptResult::RejectedUnsafe) {
            ++stats_.rejected_unsafe;
        }
    }

    void disclose(const DisclosureBody& body) {
        auth::DisclosedKey k;
        k.interval_index = body.interval;
        k.key.bytes = body.key;
        const auto gap = body.interval > receiver_.last_auth_index() ? body.interval - receiver_.last_auth_index() : 0;
        const auto result = receiver_.receiver_verify_disclosure(k);
        sim_.charge_compute(self_, crypto_cost_ * (gap + result.released.size() + result.discarded));
        for (const auto& p : result.released) {
            if (stats_.forged.contains(p.uid)) {
                ++stats_.forged_accepted;
            } else {
                ++stats_.released;
            }
        }
    }

    Simulator& sim_;
    NodeId self_;
    NodeId base_;
    MuteslaSettings settings_;
    Tick duration_;
    std::uint64_t crypto_cost_;
    const auth::KeyChain& chain_;
    adversary::Adversary* adversary_;
    MuteslaStats& stats_;
    auth::ReceiverAuthState receiver_;
    std::set<std::uint64_t> seen_;
};

// ---------------------------------------------------------------------------
// Merkle overlay: every node announces its public key with a membership
// proof; neighbors check it against the root. Compromised nodes announce a
// key that is not in the directory.

struct MerkleStats {
    std::uint64_t verified = 0;
    std::uint64_t rejected = 0;
};

constexpr Tick kMerkleHelloAt = 1;

Bytes directory_key(const crypto::Key& master, NodeId id) {
    const auto d = crypto::hash("pk:" + crypto::to_hex(master) + ":" + std::to_string(id.value));
    return Bytes(d.bytes.begin(), d.bytes.end());
}

class MerkleOverlay : public Protocol {
public:
    MerkleOverlay(Simulator& sim, NodeId self, const auth::MerkleTree& tree, const crypto::Key& master,
                  std::uint64_t crypto_cost, adversary::Adversary* adversary, MerkleStats& stats)
        : sim_(sim), self_(self), tree_(tree), master_(master), crypto_cost_(crypto_cost), adversary_(adversary),
          stats_(stats) {}

    void start() override {
        sim_.schedule_timer(self_, kMerkleHelloAt, [this] {
            auto pk = directory_key(master_, self_);
            if (adversary_ != nullptr && adversary_->active(sim_.now())) {
                const auto fake = crypto::hash("impostor:" + std::to_string(self_.value));
                pk.assign(fake.bytes.begin(), fake.bytes.end());
            }
            Packet p;
            p.uid = sim_.next_uid();
            p.kind = PacketKind::Hello;
            p.src = self_;
            p.dst = self_;
            p.body = HelloBody{auth::encode_credential(self_, pk, auth::prove(tree_, self_))};
            sim_.transmit(self_, std::move(p));
        });
    }

    void on_receive(const Delivery& d) override {
        const auto* body = std::get_if<HelloBody>(&d.packet.body);
        if (d.packet.kind != PacketKind::Hello || body == nullptr || body->credential.empty()) return;
        const auto cred = auth::decode_credential(body->credential);
        const auto height = static_cast<std::uint32_t>(tree_.levels().size() - 1);
        sim_.charge_compute(self_, crypto_cost_ * (height + 1));
        const bool ok = cred && cred->id == d.transmitter &&
                        auth::verify(tree_.root(), cred->id, cred->public_key, cred->path, height);
        ++(ok ? stats_.verified : stats_.rejected);
    }

private:
    Simulator& sim_;
    NodeId self_;
    const auth::MerkleTree& tree_;
    crypto::Key master_;
    std::uint64_t crypto_cost_;
    adversary::Adversary* adversary_;
    MerkleStats& stats_;
};

// ---------------------------------------------------------------------------

struct SnepStats {
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
};

struct SnepPair {
    auth::SnepSession sender;
    auth::SnepSession receiver;
};

class Harness {
public:
    Harness(const Scenario& s, const RunOptions& options)
        : s_(s),
          options_(options),
          topology_(build_topology(s.topology)),
          sim_(topology_, radio(s, options), s.seed),
          adversaries_(topology_.size()) {}

    RunResult execute();

private:
    static RadioConfig radio(const Scenario& s, const RunOptions& o) {
        RadioConfig r;
        r.header_bits = s.constants.header_bits;
        r.link_drop_q = s.constants.link_drop_q;
        r.hop_delay = s.constants.hop_delay;
        r.epsilon = s.epsilon;
        r.costs = s.constants.costs;
        r.trace = o.trace;
        return r;
    }

    adversary::Adversary* adversary_at(NodeId n) { return adversaries_[n.value].get(); }
    void attach_protocol();
    void attach_overlays();
    void schedule_traffic();
    void watch_snep();
    SnepPair& pair(NodeId src, NodeId dst);
    std::uint64_t send(NodeId src, NodeId dst, Bytes payload);
    MetricsReport collect();

    const Scenario& s_;
    RunOptions options_;
    Topology topology_;
    Simulator sim_;
    adversary::GroundTruthLedger truth_;
    DetectionLog log_;
    std::vector<std::unique_ptr<adversary::Adversary>> adversaries_;

    std::vector<routing::AodvAgent*> aodv_;
    std::vector<detect::DriAgent*> dri_;
    std::vector<nms::NmsAgent*> nms_;
    std::vector<routing::MultipathAgent*> multipath_;
    std::vector<std::uint64_t> node_tx_;

    std::optional<auth::KeyChain> chain_;
    std::optional<auth::MerkleTree> tree_;
    MuteslaStats mutesla_;
    MerkleStats merkle_;
    SnepStats snep_;
    std::map<std::pair<NodeId, NodeId>, SnepPair> sessions_;
};

void Harness::attach_protocol() {
    const auto n = static_cast<std::uint32_t>(topology_.size());
    const auto& c = s_.constants;
    switch (s_.protocol) {
        case ProtocolKind::Undefended:
        case ProtocolKind::FrqFrp:
        case ProtocolKind::DriGrayhole: {
            auto cfg = c.aodv;
            cfg.frq_check = s_.protocol == ProtocolKind::FrqFrp;
            for (std::uint32_t i = 0; i < n; ++i) {
                const NodeId id{i};
                aodv_.push_back(&sim_.attach<routing::AodvAgent>(id, sim_, id, cfg, adversary_at(id), &log_));
                if (s_.protocol == ProtocolKind::DriGrayhole) {
                    dri_.push_back(
                        &sim_.attach<detect::DriAgent>(id, sim_, *aodv_.back(), c.dri, adversary_at(id), &log_));
                }
            }
            break;
        }
        case ProtocolKind::Nms: {
            auto rings = nms::provision_cluster_keys(topology_, s_.master);
            for (std::uint32_t i = 0; i < n; ++i) {
                const NodeId id{i};
                nms_.push_back(&sim_.attach<nms::NmsAgent>(id, sim_, id, c.nms, std::move(rings[i]), adversary_at(id),
                                                           &log_));
            }
            break;
        }
        case ProtocolKind::Multipath2: {
            routing::MultipathConfig cfg;
            cfg.base_station = s_.base_station;
            cfg.hello_at = c.nms.hello_at;
            cfg.beacon_at = c.nms.beacon_at;
            for (std::uint32_t i = 0; i < n; ++i) {
                const NodeId id{i};
                multipath_.push_back(&sim_.attach<routing::MultipathAgent>(id, sim_, id, cfg, adversary_at(id)));
            }
            break;
        }
    }
}

void Harness::attach_overlays() {
    const auto n = static_cast<std::uint32_t>(topology_.size());
    if (s_.auth.mutesla) {
        auth::ChainParams params;
        params.interval_len = s_.mutesla.interval_len;
        params.start_time = 0;
        params.disclosure_lag = s_.mutesla.disclosure_lag;
        chain_ = auth::generate_chain(crypto::derive_key(s_.master, "mutesla-chain"), s_.mutesla.chain_length, params);
        for (std::uint32_t i = 0; i < n; ++i) {
            const NodeId id{i};
            sim_.attach<MuteslaOverlay>(id, sim_, id, s_, *chain_, adversary_at(id), mutesla_);
        }
    }
    if (s_.auth.merkle) {
        std::vector<auth::DirectoryEntry> entries;
        for (std::uint32_t i = 0; i < n; ++i) entries.push_back({NodeId{i}, directory_key(s_.master, NodeId{i})});
        tree_ = auth::build_tree(auth::KeyDirectory(std::move(entries)));
        for (std::uint32_t i = 0; i < n; ++i) {
            const NodeId id{i};
            sim_.attach<MerkleOverlay>(id, sim_, id, *tree_, s_.master, s_.constants.crypto_instructions,
                                       adversary_at(id), merkle_);
        }
    }
    if (s_.auth.snep) watch_snep();
}

SnepPair& Harness::pair(NodeId src, NodeId dst) {
    auto it = sessions_.find({src, dst});
    if (it == sessions_.end()) {
        const auto lo = std::min(src, dst).value;
        const auto hi = std::max(src, dst).value;
        const auto master = crypto::derive_key(s_.master, "pair:" + std::to_string(lo) + ":" + std::to_string(hi));
        it = sessions_
                 .emplace(std::make_pair(src, dst),
                          SnepPair{auth::make_session(src, dst, master, s_.constants.snep_window),
                                   auth::make_session(dst, src, master, s_.constants.snep_window)})
                 .first;
    }
    return it->second;
}

void Harness::watch_snep() {
    sim_.on_delivery([this](const Delivery& d, Tick) {
        const Packet& p = d.packet;
        if (p.kind != PacketKind::Data || d.receiver != p.dst || !p.next_hop || *p.next_hop != d.receiver) return;
        Bytes wire = p.payload;
        if (s_.protocol == ProtocolKind::Nms) {
            wire = crypto::ctr_decrypt(nms::cluster_key(s_.master, d.transmitter), p.uid, p.payload);
        }
        auto& session = pair(p.src, p.dst);
        sim_.charge_compute(d.receiver, s_.constants.crypto_instructions);
        const auto msg = auth::SnepMessage::decode(wire);
        if (!msg) {
            ++snep_.rejected;
            return;
        }
        auto result = auth::snep_receive(session.receiver, *msg);
        if (result.status == auth::SnepStatus::RejectAuth) {
            // Counters drifted past the window: resynchronize and retry once.
            if (auth::counter_resync(session.receiver, session.sender, p.uid)) {
                result = auth::snep_receive(session.receiver, *msg);
            }
        }
        ++(result.accepted() ? snep_.accepted : snep_.rejected);
    });
}

std::uint64_t Harness::send(NodeId src, NodeId dst, Bytes payload) {
    if (s_.auth.snep) {
        payload = auth::snep_send(pair(src, dst).sender, payload).encode();
        sim_.charge_compute(src, s_.constants.crypto_instructions);
    }
    switch (s_.protocol) {
        case ProtocolKind::Nms: return nms_[src.value]->send_data(std::move(payload));
        case ProtocolKind::Multipath2: return multipath_[src.value]->send_data(std::move(payload));
        default: return aodv_[src.value]->send_data(dst, std::move(payload));
    }
}

void Harness::schedule_traffic() {
    for (std::size_t f = 0; f < s_.traffic.size(); ++f) {
        const auto& flow = s_.traffic[f];
        const NodeId dst = flow.destination.value_or(s_.base_station);
        Rng rng(derive_seed(s_.seed, "traffic", f));
        for (std::uint32_t i = 0; i < flow.count; ++i) {
            Tick at = flow.start + static_cast<Tick>(i) * flow.period;
            if (flow.jitter > 0) at += rng.uniform_int(0, flow.jitter);
            if (at >= s_.duration) break;
            Bytes payload(flow.payload_bytes);
            for (auto& b : payload) b = static_cast<std::uint8_t>(rng.next());
            sim_.schedule_timer(flow.source, at, [this, src = flow.source, dst, payload = std::move(payload)]() mutable {
                send(src, dst, std::move(payload));
            });
        }
    }
}

MetricsReport Harness::collect() {
    MetricsReport m;
    m.scenario = s_.name;
    m.protocol = std::string(to_string(s_.protocol));
    m.seed = s_.seed;
    m.axis = options_.axis;
    m.axis_value = options_.axis_value;

    for (const auto& [uid, e] : sim_.data_ledger().entries()) {
        ++m.generated;
        if (e.delivered_at) {
            ++m.delivered;
        } else if (!e.last_loss) {
            ++m.pending;
        } else {
            switch (*e.last_loss) {
                case LossCause::AdversaryDrop: ++m.adversary_dropped; break;
                case LossCause::ChannelDrop: ++m.channel_dropped; break;
                case LossCause::TtlExpired: ++m.ttl_expired; break;
                case LossCause::NoRoute: ++m.no_route; break;
            }
        }
    }
    m.delivery_ratio = m.generated == 0 ? 1.0 : static_cast<double>(m.delivered) / static_cast<double>(m.generated);

    m.total_transmissions = sim_.transmissions();
    m.data_transmissions = sim_.transmissions_of(PacketKind::Data);
    m.control_packets = m.total_transmissions - m.data_transmissions;
    const auto energy = sim_.energy().totals();
    m.energy_transmit = energy.transmit;
    m.energy_receive = energy.receive;
    m.energy_compute = energy.compute;
    m.energy_total = energy.total();

    for (const auto& e : log_.events()) {
        ++m.detections;
        ++(truth_.is_adversary(e.suspect) ? m.true_positives : m.false_positives);
    }
    double latency_sum = 0.0;
    std::size_t latency_n = 0;
    for (const auto& profile : s_.adversaries) {
        const auto drop = truth_.first(adversary::AdversaryAction::DropData, profile.node);
        std::optional<Tick> caught;
        for (const auto& e : log_.events()) {
            if (e.suspect == profile.node && (!caught || e.tick < *caught)) caught = e.tick;
        }
        if (drop && caught && *caught >= *drop) {
            latency_sum += static_cast<double>(*caught - *drop);
            ++latency_n;
        }
    }
    if (latency_n > 0) m.detection_latency = latency_sum / static_cast<double>(latency_n);

    for (const auto* a : nms_) {
        m.promotions += a->counters().promotions;
        m.reroutes += a->counters().reroutes;
        m.claims += a->counters().claims;
        m.blacklist_size += a->blacklist().size();
    }
    for (const auto* a : aodv_) {
        m.blacklist_size += a->blacklist_set().size();
        for (const auto& v : a->frq_verdicts()) {
            switch (v.outcome) {
                case routing::FrqOutcome::Trusted: ++m.frq_trusted; break;
                case routing::FrqOutcome::Flagged: ++m.frq_flagged; break;
                case routing::FrqOutcome::Inconclusive: ++m.frq_inconclusive; break;
            }
        }
    }
    std::uint64_t reported = 0, flagged = 0;
    for (const auto* a : dri_) {
        for (const auto& v : a->verdicts()) {
            if (!truth_.is_adversary(v.suspect)) continue;
            reported += v.statuses.size();
            flagged += v.flagged.size();
        }
    }
    if (reported > 0) m.flag_rate = static_cast<double>(flagged) / static_cast<double>(reported);

    using adversary::AdversaryAction;
    m.adversary_drops = truth_.count(AdversaryAction::DropData);
    m.forgeries = truth_.count(AdversaryAction::ForgeRrep) + truth_.count(AdversaryAction::ForgeFrp) +
                  truth_.count(AdversaryAction::ForgeGradient);

    m.mutesla_released = mutesla_.released;
    m.mutesla_rejected_unsafe = mutesla_.rejected_unsafe;
    m.mutesla_forged_accepted = mutesla_.forged_accepted;
    m.snep_accepted = snep_.accepted;
    m.snep_rejected = snep_.rejected;
    m.merkle_verified = merkle_.verified;
    m.merkle_rejected = merkle_.rejected;
    return m;
}

RunResult Harness::execute() {
    for (const auto& profile : s_.adversaries) {
        adversaries_[profile.node.value] = std::make_unique<adversary::Adversary>(profile, s_.seed, &truth_);
        truth_.mark_adversary(profile.node);
    }
    node_tx_.assign(topology_.size(), 0);
    sim_.on_transmit([this](const Packet&, NodeId tx, Tick) { ++node_tx_[tx.value]; });

    attach_protocol();
    attach_overlays();
    schedule_traffic();
    if (options_.instrument) options_.instrument(sim_);
    sim_.run_until(s_.duration);

    RunResult r;
    r.metrics = collect();
    r.trace = sim_.trace().text();
    r.ledger = sim_.data_ledger();
    r.detections = log_.events();
    for (const auto& e : r.detections) r.detection_correct.push_back(truth_.is_adversary(e.suspect));

    std::vector<std::uint64_t> blacklisted_by(topology_.size(), 0);
    auto tally = [&](const std::set<NodeId>& bl) {
        for (auto v : bl) ++blacklisted_by[v.value];
    };
    for (const auto* a : aodv_) tally(a->blacklist_set());
    for (const auto* a : nms_) tally(a->blacklist());
    for (std::uint32_t i = 0; i < topology_.size(); ++i) {
        NodeReport nr;
        nr.node = NodeId{i};
        if (adversaries_[i]) nr.adversary = adversaries_[i]->profile().kind;
        nr.transmissions = node_tx_[i];
        nr.energy = sim_.energy().node(NodeId{i});
        nr.blacklisted_by = blacklisted_by[i];
        r.nodes.push_back(nr);
    }
    return r;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> columns = {
        "scenario",          "protocol",          "seed",
        "axis",              "axis_value",        "generated",
        "delivered",         "delivery_ratio",    "adversary_dropped",
        "channel_dropped",   "ttl_expired",       "no_route",
        "pending",           "control_packets",   "data_transmissions",
        "total_transmissions", "energy_total",    "energy_transmit",
        "energy_receive",    "energy_compute",    "detections",
        "true_positives",    "false_positives",   "detection_latency",
        "promotions",        "reroutes",          "claims",
        "blacklist_size",    "frq_trusted",       "frq_flagged",
        "frq_inconclusive",  "flag_rate",         "adversary_drops",
        "forgeries",         "mutesla_released",  "mutesla_rejected_unsafe",
        "mutesla_forged_accepted", "snep_accepted", "snep_rejected",
        "merkle_verified",   "merkle_rejected",
    };
    return columns;
}

std::string csv_header() {
    std::string out;
    for (const auto& c : csv_columns()) {
        if (!out.empty()) out += ',';
        out += c;
    }
    return out;
}

std::string csv_row(const MetricsReport& m) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    const std::vector<std::string> cells = {
        csv_field(m.scenario),
        m.protocol,
        std::to_string(m.seed),
        csv_field(m.axis),
        csv_field(m.axis_value),
        std::to_string(m.generated),
        std::to_string(m.delivered),
        format_double(m.delivery_ratio),
        std::to_string(m.adversary_dropped),
        std::to_string(m.channel_dropped),
        std::to_string(m.ttl_expired),
        std::to_string(m.no_route),
        std::to_string(m.pending),
        std::to_string(m.control_packets),
        std::to_string(m.data_transmissions),
        std::to_string(m.total_transmissions),
        std::to_string(m.energy_total),
        std::to_string(m.energy_transmit),
        std::to_string(m.energy_receive),
        std::to_string(m.energy_compute),
        std::to_string(m.detections),
        std::to_string(m.true_positives),
        std::to_string(m.false_positives),
        opt(m.detection_latency),
        std::to_string(m.promotions),
        std::to_string(m.reroutes),
        std::to_string(m.claims),
        std::to_string(m.blacklist_size),
        std::to_string(m.frq_trusted),
        std::to_string(m.frq_flagged),
        std::to_string(m.frq_inconclusive),
        opt(m.flag_rate),
        std::to_string(m.adversary_drops),
        std::to_string(m.forgeries),
        std::to_string(m.mutesla_released),
        std::to_string(m.mutesla_rejected_unsafe),
        std::to_string(m.mutesla_forged_accepted),
        std::to_string(m.snep_accepted),
        std::to_string(m.snep_rejected),
        std::to_string(m.merkle_verified),
        std::to_string(m.merkle_rejected),
    };
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

std::string to_csv(const std::vector<MetricsReport>& rows) {
    std::string out = csv_header() + "\n";
    for (const auto& r : rows) out += csv_row(r) + "\n";
    return out;
}

RunResult run(const Scenario& scenario, const RunOptions& options) { return Harness(scenario, options).execute(); }

std::string detections_csv(const RunResult& result) {
    std::string out = "tick,mechanism,initiator,suspect,flagged,round_id,true_positive\n";
    for (std::size_t i = 0; i < result.detections.size(); ++i) {
        const auto& e = result.detections[i];
        std::string flagged;
        for (auto f : e.flagged) {
            if (!flagged.empty()) flagged += ' ';
            flagged += std::to_string(f.value);
        }
        out += std::to_string(e.tick) + "," + std::string(to_string(e.mechanism)) + "," +
               std::to_string(e.initiator.value) + "," + std::to_string(e.suspect.value) + "," + flagged + "," +
               std::to_string(e.round_id) + "," + (result.detection_correct[i] ? "1" : "0") + "\n";
    }
    return out;
}

std::string nodes_csv(const RunResult& result) {
    std::string out =
        "node,adversary,transmissions,energy_transmit,energy_receive,energy_compute,energy_total,blacklisted_by\n";
    for (const auto& n : result.nodes) {
        out += std::to_string(n.node.value) + "," +
               (n.adversary ? std::string(adversary::to_string(*n.adversary)) : std::string()) + "," +
               std::to_string(n.transmissions) + "," + std::to_string(n.energy.transmit) + "," +
               std::to_string(n.energy.receive) + "," + std::to_string(n.energy.compute) + "," +
               std::to_string(n.energy.total()) + "," + std::to_string(n.blacklisted_by) + "\n";
    }
    return out;
}

std::vector<std::string> parse_values(std::string_view list) {
    std::vector<std::string> out;
    while (true) {
        const auto comma = list.find(',');
        auto item = list.substr(0, comma);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (item.empty()) throw ScenarioError("values", "empty entry in value list");
        out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
    }
    return out;
}

namespace {

json numeric_value(const std::string& axis, const std::string& text) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    std::int64_t i = 0;
    if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc{} && p == last) return i;
    double d = 0.0;
    if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc{} && p == last) return d;
    throw ScenarioError(axis, "sweep value \"" + text + "\" is not numeric");
}

const json* find_dotted(const json& doc, std::string_view path) {
    const json* cur = &doc;
    while (true) {
        const auto dot = path.find('.');
        const std::string seg(path.substr(0, dot));
        if (cur->is_array()) {
            std::size_t idx = 0;
            const auto [p, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
            if (ec != std::errc{} || p != seg.data() + seg.size() || idx >= cur->size()) return nullptr;
            cur = &(*cur)[idx];
        } else if (cur->is_object() && cur->contains(seg)) {
            cur = &(*cur)[seg];
        } else {
            return nullptr;
        }
        if (dot == std::string_view::npos) return cur;
        path.remove_prefix(dot + 1);
    }
}

}  // namespace

std::vector<RunResult> sweep(const json& base, const SweepSpec& spec) {
    if (spec.values.empty()) throw ScenarioError("values", "sweep needs at least one value");
    if (!base.contains("seed") || !base["seed"].is_number_unsigned()) {
        throw ScenarioError("seed", "required field is missing");
    }
    const bool protocol_axis = spec.axis == "protocol";
    if (!protocol_axis) {
        const json* current = find_dotted(base, spec.axis);
        if (current != nullptr && !current->is_number()) throw ScenarioError(spec.axis, "axis field is not numeric");
    }
    const auto seed = base["seed"].get<std::uint64_t>();

    // Validate every document up front so a bad value fails before any run.
    std::vector<Scenario> scenarios;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        json doc = base;
        set_dotted(doc, spec.axis, protocol_axis ? json(spec.values[i]) : numeric_value(spec.axis, spec.values[i]));
        doc["seed"] = seed + i;
        scenarios.push_back(parse_scenario(doc));
    }

    std::vector<RunResult> results(scenarios.size());
    auto work = [&](std::size_t i) {
        RunOptions o;
        o.trace = spec.trace;
        o.axis = spec.axis;
        o.axis_value = spec.values[i];
        results[i] = run(scenarios[i], o);
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(scenarios.size())));
    if (jobs == 1) {
        for (std::size_t i = 0; i < scenarios.size(); ++i) work(i);
        return results;
    }
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) {
        pool.emplace_back([&, j] {
            for (std::size_t i = j; i < scenarios.size(); i += jobs) work(i);
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

}  // namespace wsnsec::harness
