// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "wsnsec/auth/merkle.hpp"
#include "wsnsec/auth/mutesla.hpp"
#include "wsnsec/auth/snep.hpp"
#include "wsnsec/detect/dri.hpp"
#include "wsnsec/harness/run.hpp"

using namespace wsnsec;

namespace {

/// Collects failed expectations for one criterion.
class Outcome {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 8) failures_.push_back(what);
        failed_ = failed_ || !ok;
    }
    bool failed() const noexcept { return failed_; }
    std::string summary() const {
        std::ostringstream ss;
        for (std::size_t i = 0; i < failures_.size(); ++i) ss << (i ? "; " : "") << failures_[i];
        return ss.str();
    }

private:
    bool failed_ = false;
    std::vector<std::string> failures_;
};

std::string show(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

// Oracle for the chain function: SHA-256 computed here, truncated to 16 bytes.
crypto::Key oracle_step(const crypto::Key& k) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(k.bytes.data(), k.bytes.size(), md, &len, EVP_sha256(), nullptr);
    crypto::Key out;
    std::copy_n(md, out.bytes.size(), out.bytes.begin());
    return out;
}

template <typename Fixed>
Fixed random_fixed(std::mt19937_64& rng) {
    Fixed f;
    for (auto& b : f.bytes) b = static_cast<std::uint8_t>(rng());
    return f;
}

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
    Bytes b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    return b;
}

harness::Scenario load(const std::string& name) {
    return harness::load_scenario(std::string(WSNSEC_SCENARIO_DIR) + "/" + name);
}

// ---------------------------------------------------------------------------

void replay_key_chain_example(Outcome& o) {
    const auth::ChainParams params{10, 0, 2};
    std::mt19937_64 rng(11);
    const auto chain = auth::generate_chain(random_fixed<crypto::Key>(rng), 4, params);
    o.expect(oracle_step(oracle_step(chain.key(2))) == chain.commitment(), "K0 != F(F(K2))");
    o.expect(oracle_step(chain.key(1)) == chain.key(0), "K0 != F(K1)");

    auth::ReceiverAuthState rx(chain.commitment(), params, 1);
    const Bytes body{1, 2, 3};
    const auto p1 = auth::auth_broadcast(chain, body, 12, NodeId{0}, 1);
    const auto p2 = auth::auth_broadcast(chain, body, 15, NodeId{0}, 2);
    const auto p3 = auth::auth_broadcast(chain, body, 23, NodeId{0}, 3);
    o.expect(p1.counter == 1u && p2.counter == 1u && p3.counter == 2u, "packets tagged with wrong intervals");
    o.expect(rx.receiver_accept(p1, 1, 13) == auth::AcceptResult::Buffered, "P1 not buffered");
    o.expect(rx.receiver_accept(p2, 1, 16) == auth::AcceptResult::Buffered, "P2 not buffered");
    o.expect(rx.receiver_accept(p3, 2, 24) == auth::AcceptResult::Buffered, "P3 not buffered");
    // K1's disclosure in interval 3 is lost; K2 arrives in interval 4.
    const auto res = rx.receiver_verify_disclosure({2, chain.key(2)});
    o.expect(res.key_authentic, "K2 not authentic");
    std::set<std::uint64_t> uids;
    for (const auto& p : res.released) uids.insert(p.uid);
    o.expect(uids == std::set<std::uint64_t>{1, 2, 3}, "released " + std::to_string(uids.size()) + " of 3");
    o.expect(rx.pending() == 0, "packets left pending");
}

void mutesla_soundness(Outcome& o) {
    const Tick len = 10;
    const std::uint32_t lag = 2, intervals = 100;
    const auth::ChainParams params{len, 0, lag};
    std::mt19937_64 rng(22);
    const auto chain = auth::generate_chain(random_fixed<crypto::Key>(rng), intervals + lag + 1, params);

    auth::ReceiverAuthState rx(chain.commitment(), params, 2);
    std::size_t forged_released = 0, genuine_released = 0, forged = 0;
    for (std::uint32_t i = 1; i <= intervals; ++i) {
        const Tick send = static_cast<Tick>(i) * len + 1;
        const auto genuine = auth::auth_broadcast(chain, Bytes{7}, send, NodeId{0}, 1'000'000 + i);
        o.expect(rx.receiver_accept(genuine, i, send) == auth::AcceptResult::Buffered, "genuine packet unsafe");
        for (int k = 0; k < 100; ++k, ++forged) {
            auto p = genuine;
            p.uid = forged;
            p.payload = random_bytes(rng, 8);
            p.tag = random_fixed<crypto::Tag>(rng).bytes;
            rx.receiver_accept(p, i, send);
        }
        for (const auto& p : rx.receiver_verify_disclosure({i, chain.key(i)}).released) {
            (p.uid >= 1'000'000 ? genuine_released : forged_released) += 1;
        }
    }
    o.expect(forged == 10'000, "forged count");
    o.expect(forged_released == 0, std::to_string(forged_released) + " forgeries accepted");
    o.expect(genuine_released == intervals, "genuine released " + std::to_string(genuine_released));

    // Safety boundary: interval i is unsafe once the sender may be in i+lag.
    std::size_t mismatches = 0;
    for (Tick eps : {0, 1, 3, 9, 25}) {
        for (std::uint32_t i = 1; i <= 6; ++i) {
            const auto p = auth::auth_broadcast(chain, Bytes{1}, static_cast<Tick>(i) * len, NodeId{0}, i);
            for (Tick t = static_cast<Tick>(i) * len; t < static_cast<Tick>(i + lag + 3) * len; ++t) {
                auth::ReceiverAuthState fresh(chain.commitment(), params, eps);
                const bool unsafe = (t + eps) / len >= static_cast<Tick>(i + lag);
                const auto got = fresh.receiver_accept(p, i, t);
                mismatches += (got == auth::AcceptResult::RejectedUnsafe) != unsafe;
            }
        }
    }
    o.expect(mismatches == 0, std::to_string(mismatches) + " safety decisions differ from the boundary");

    const auto grid = harness::run(load("grid_secure_stack.json"));
    o.expect(grid.metrics.mutesla_forged_accepted == 0, "harness accepted forged broadcasts");
}

void snep_suite(Outcome& o) {
    std::mt19937_64 rng(33);
    const auto master = random_fixed<crypto::Key>(rng);
    const std::uint32_t W = 4;
    auto pair = [&] {
        return std::pair{auth::make_session(NodeId{1}, NodeId{2}, master, W),
                         auth::make_session(NodeId{2}, NodeId{1}, master, W)};
    };

    {
        auto [a, b] = pair();
        bool ok = true;
        for (std::uint32_t i = 0; i < 500; ++i) {
            const auto m = random_bytes(rng, 1 + i % 40);
            const auto r = auth::snep_receive(b, *auth::SnepMessage::decode(auth::snep_send(a, m).encode()));
            ok = ok && r.accepted() && r.data == m && r.counter == i;
        }
        o.expect(ok, "lossless roundtrip lost or reordered data");
    }
    {
        auto [a, b] = pair();
        std::size_t accepted = 0;
        for (int i = 0; i < 200; ++i) {
            const auto msg = auth::snep_send(a, Bytes{1, 2, 3});
            accepted += auth::snep_receive(b, msg).accepted();
            accepted += auth::snep_receive(b, msg).accepted();
        }
        o.expect(accepted == 200, "duplicates accepted: " + std::to_string(accepted - 200));
    }
    {
        auto [a, b] = pair();
        std::set<Bytes> seen;
        const Bytes same(24, 0x5a);
        for (int i = 0; i < 1000; ++i) seen.insert(auth::snep_send(a, same).ciphertext);
        o.expect(seen.size() == 1000, "equal ciphertexts: " + std::to_string(1000 - seen.size()));
    }
    {
        // Every 12-message drop pattern with no run of W or more drops.
        std::size_t failures = 0, patterns = 0;
        for (std::uint32_t mask = 0; mask < (1u << 12); ++mask) {
            std::uint32_t run = 0, longest = 0;
            for (int i = 0; i < 12; ++i) {
                run = (mask >> i & 1) ? run + 1 : 0;
                longest = std::max(longest, run);
            }
            if (longest >= W) continue;
            ++patterns;
            auto [a, b] = pair();
            for (int i = 0; i < 13; ++i) {  // the 13th is always delivered
                const Bytes m{static_cast<std::uint8_t>(i)};
                const auto msg = auth::snep_send(a, m);
                if (i < 12 && (mask >> i & 1)) continue;
                const auto r = auth::snep_receive(b, msg);
                failures += !(r.accepted() && r.data == m);
            }
        }
        o.expect(patterns > 0 && failures == 0, std::to_string(failures) + " losses under short drop runs");
    }
    {
        auto [a, b] = pair();
        for (int i = 0; i < 10; ++i) auth::snep_send(a, Bytes{9});
        const auto lost = auth::snep_send(a, Bytes{1});
        o.expect(!auth::snep_receive(b, lost).accepted(), "accepted past the window");
        o.expect(auth::counter_resync(b, a, 0x1234), "resync failed");
        bool ok = true;
        for (int i = 0; i < 20; ++i) {
            const Bytes m{static_cast<std::uint8_t>(i)};
            const auto r = auth::snep_receive(b, auth::snep_send(a, m));
            ok = ok && r.accepted() && r.data == m;
        }
        o.expect(ok, "delivery not restored after resync");
    }
}

void merkle_suite(Outcome& o) {
    std::mt19937_64 rng(44);
    for (std::size_t n : {1, 4, 5, 8}) {
        const std::string tag = "N=" + std::to_string(n) + ": ";
        std::vector<auth::DirectoryEntry> entries;
        for (std::size_t i = 0; i < n; ++i) entries.push_back({NodeId{static_cast<std::uint32_t>(10 + 3 * i)}, random_bytes(rng, 32)});
        const auto tree = auth::build_tree(auth::KeyDirectory(entries));
        std::uint32_t h = 0;
        while ((std::size_t{1} << h) < n) ++h;
        o.expect(tree.height() == h, tag + "height " + std::to_string(tree.height()));

        std::size_t bad_proofs = 0, bad_state = 0, tamper_accepted = 0;
        for (const auto& e : entries) {
            const auto path = auth::prove(tree, e.id);
            bad_proofs += !auth::verify(tree.root(), e.id, e.public_key, path);
            const auto v = auth::make_verifier(tree, e.id);
            bad_state += v.storage_units() != h + 1 || v.root != tree.root();
            for (const auto& other : entries) bad_proofs += !v.authenticate(other.id, other.public_key, auth::prove(tree, other.id));

            for (std::size_t bit = 0; bit < e.public_key.size() * 8; ++bit) {
                auto pk = e.public_key;
                pk[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
                tamper_accepted += auth::verify(tree.root(), e.id, pk, path);
            }
            for (std::size_t s = 0; s < path.siblings.size(); ++s) {
                for (std::size_t bit = 0; bit < 256; ++bit) {
                    auto p = path;
                    p.siblings[s].sibling.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
                    tamper_accepted += auth::verify(tree.root(), e.id, e.public_key, p);
                }
                auto p = path;
                p.siblings[s].side = p.siblings[s].side == auth::Side::Left ? auth::Side::Right : auth::Side::Left;
                tamper_accepted += auth::verify(tree.root(), e.id, e.public_key, p);
            }
            for (std::size_t bit = 0; bit < 256; ++bit) {
                auto root = tree.root();
                root.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
                tamper_accepted += auth::verify(root, e.id, e.public_key, path);
            }
        }
        o.expect(bad_proofs == 0, tag + std::to_string(bad_proofs) + " member proofs failed");
        o.expect(bad_state == 0, tag + "verifier state is not H+1 digests");
        o.expect(tamper_accepted == 0, tag + std::to_string(tamper_accepted) + " tampered inputs accepted");

        std::size_t forged = 0;
        const std::size_t trials = n == 8 ? 100'000 : 10'000;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto& e = entries[rng() % n];
            auth::AuthPath p;
            for (std::uint32_t s = 0; s < h; ++s) {
                p.siblings.push_back({random_fixed<auth::Digest>(rng), (rng() & 1) ? auth::Side::Left : auth::Side::Right});
            }
            // Alternate between a random key with a random path and a random
            // key presented with the genuine path.
            const auto path = (t & 1) ? p : auth::prove(tree, e.id);
            forged += auth::verify(tree.root(), e.id, random_bytes(rng, 32), path);
        }
        o.expect(forged == 0, tag + std::to_string(forged) + " random forgeries accepted");
    }
}

// ---------------------------------------------------------------------------

using Edges = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

const Edges kDriEdges{{7, 1}, {7, 2}, {7, 6}, {7, 8}, {7, 9}, {1, 2}, {1, 6}, {1, 8},
                       {1, 9}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {0, 8}, {0, 9}};
const Edges kStar{{0, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};

struct DriNet {
    std::unique_ptr<Simulator> sim;
    adversary::GroundTruthLedger truth;
    DetectionLog log;
    std::vector<std::unique_ptr<adversary::Adversary>> adversaries;
    std::vector<routing::AodvAgent*> aodv;
    std::vector<detect::DriAgent*> dri;

    DriNet(std::uint32_t n, Edges edges, const std::vector<adversary::AdversaryProfile>& profiles, detect::DriConfig cfg,
           std::uint64_t seed) {
        RadioConfig radio;
        radio.link_drop_q = 0.0;
        sim = std::make_unique<Simulator>(build_topology(TopologySpec::explicit_edges(n, std::move(edges))), radio, seed);
        std::vector<adversary::Adversary*> by_node(n, nullptr);
        for (const auto& p : profiles) {
            adversaries.push_back(std::make_unique<adversary::Adversary>(p, seed, &truth));
            by_node[p.node.value] = adversaries.back().get();
        }
        for (std::uint32_t i = 0; i < n; ++i) {
            aodv.push_back(&sim->attach<routing::AodvAgent>(NodeId{i}, *sim, NodeId{i}, routing::AodvConfig{}, by_node[i], &log));
            dri.push_back(&sim->attach<detect::DriAgent>(NodeId{i}, *sim, *aodv.back(), cfg, by_node[i], &log));
        }
    }
};

detect::DriConfig manual_dri() {
    detect::DriConfig c;
    c.scanning = false;
    return c;
}

void dri_tables(Outcome& o) {
    adversary::AdversaryProfile gh{NodeId{1}, adversary::AdversaryKind::Grayhole};
    gh.drop_p = 1.0;
    gh.victims = make_ids({2});
    DriNet net(10, kDriEdges, {gh}, manual_dri(), 1);
    auto route = [&](std::vector<std::uint32_t> hops, Tick at) {
        net.sim->schedule_timer(NodeId{hops.front()}, at, [&net, hops] {
            Packet p;
            p.uid = net.sim->next_uid();
            p.kind = PacketKind::Data;
            p.src = NodeId{hops.front()};
            p.dst = NodeId{hops.back()};
            for (auto h : hops) p.route.push_back(NodeId{h});
            p.payload = Bytes(8, 1);
            net.aodv[hops.front()]->send_routed(std::move(p));
        });
    };
    route({2, 7, 9, 0}, 1);
    route({8, 7, 6, 5}, 1);
    route({8, 7, 2, 3}, 20);
    net.sim->run_until(50);
    net.dri[7]->start_local_check(NodeId{2}, NodeId{1});
    net.sim->run_until(100);
    net.dri[7]->start_local_check(NodeId{8}, NodeId{1});
    net.sim->run_until(150);

    struct Row { std::uint32_t node; bool from, through, check; };
    const Row table2[] = {{1, 0, 0, 0}, {2, 1, 1, 1}, {6, 0, 1, 0}, {8, 1, 0, 1}, {9, 0, 1, 0}};
    const auto& t = net.dri[7]->table();
    for (const auto& row : table2) {
        const auto& e = t.at(NodeId{row.node});
        o.expect(e.from == row.from && e.through == row.through && e.check_bit == row.check,
                 "DRI row for node " + std::to_string(row.node) + " differs");
    }
    o.expect(t.entries().size() == 5, "node 7 tracks " + std::to_string(t.entries().size()) + " neighbors");

    net.dri[7]->scan();
    net.sim->run_until(1000);
    const auto& verdicts = net.dri[7]->verdicts();
    o.expect(verdicts.size() == 1, std::to_string(verdicts.size()) + " cooperative rounds");
    if (verdicts.size() == 1) {
        const std::map<NodeId, bool> table3{{NodeId{2}, false}, {NodeId{6}, true}, {NodeId{8}, true}, {NodeId{9}, true}};
        o.expect(verdicts[0].suspect == NodeId{1}, "wrong suspect");
        o.expect(verdicts[0].statuses == table3, "ProbeCheck statuses differ");
        o.expect(verdicts[0].flagged == make_ids({2}), "flag evidence differs");
    }
    o.expect(net.dri[7]->blacklist() == std::set<NodeId>{NodeId{1}}, "node 1 not blacklisted alone");
}

void detection_rate(Outcome& o) {
    detect::DriConfig cfg = manual_dri();
    cfg.blacklist_on_flag = false;
    for (double p : {0.3, 0.5, 0.8}) {
        adversary::AdversaryProfile gh{NodeId{1}, adversary::AdversaryKind::Grayhole};
        gh.drop_p = p;
        DriNet net(6, kStar, {gh}, cfg, 1234);
        const int rounds = 10'000;
        int done = 0;
        std::size_t flags = 0, entries = 0;
        net.dri[0]->add_verdict_listener([&](const detect::SuspicionVerdict& v) {
            ++done;
            entries += v.statuses.size();
            flags += v.flagged.size();
            if (done < rounds) net.sim->schedule_timer(NodeId{0}, 1, [&] { net.dri[0]->start_cooperative(NodeId{1}); });
        });
        net.dri[0]->start_cooperative(NodeId{1});
        net.sim->run_until(1'000'000'000);
        const double rate = entries ? double(flags) / double(entries) : -1;
        o.expect(done == rounds, "p=" + show(p) + ": " + std::to_string(done) + " rounds completed");
        o.expect(std::abs(rate - p * p * p) <= 0.03, "p=" + show(p) + ": flag rate " + show(rate) + " vs " + show(p * p * p));
    }
    std::size_t false_flags = 0, rounds = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        DriNet net(6, kStar, {}, manual_dri(), seed);
        net.dri[0]->start_cooperative(NodeId{1});
        net.sim->run_until(500);
        for (const auto& v : net.dri[0]->verdicts()) {
            ++rounds;
            false_flags += v.flagged.size();
        }
        false_flags += net.dri[0]->blacklist().size();
    }
    o.expect(rounds == 100, std::to_string(rounds) + " honest rounds completed");
    o.expect(false_flags == 0, std::to_string(false_flags) + " false positives");
}

// ---------------------------------------------------------------------------

void collusion_pair(Outcome& o) {
    auto s = load("collusion_pair.json");
    s.protocol = harness::ProtocolKind::FrqFrp;
    const auto frq = harness::run(s);
    o.expect(frq.metrics.generated > 0, "no traffic");
    o.expect(frq.metrics.frq_trusted > 0 && frq.metrics.frq_flagged == 0, "FRq verdict is not trusted");
    o.expect(frq.metrics.delivered == 0, "FRq baseline delivered " + std::to_string(frq.metrics.delivered));

    s.protocol = harness::ProtocolKind::DriGrayhole;
    const auto dri = harness::run(s);
    std::optional<Tick> blacklisted_at;
    for (const auto& e : dri.detections) {
        if (e.suspect == NodeId{4} && !e.flagged.empty() && !blacklisted_at) blacklisted_at = e.tick;
    }
    o.expect(blacklisted_at.has_value(), "node 4 never flagged");
    o.expect(dri.nodes.at(4).blacklisted_by > 0, "node 4 not blacklisted");
    o.expect(dri.metrics.false_positives == 0, "honest node flagged");
    if (blacklisted_at) {
        std::size_t after = 0, delivered = 0;
        for (const auto& [uid, e] : dri.ledger.entries()) {
            if (e.generated_at <= *blacklisted_at) continue;
            ++after;
            delivered += e.delivered_at.has_value();
        }
        o.expect(after > 0 && delivered == after,
                 "delivery after blacklisting " + std::to_string(delivered) + "/" + std::to_string(after));
    }
}

void nms_bypass(Outcome& o) {
    const auto s = load("strip_two_droppers.json");
    std::map<std::pair<std::uint64_t, std::uint32_t>, std::vector<std::pair<NodeId, Tick>>> data_tx;
    struct Claim { NodeId claimer; std::uint64_t uid; std::uint32_t layer; Tick at; };
    std::vector<Claim> claims;
    harness::RunOptions opts;
    opts.instrument = [&](Simulator& sim) {
        sim.on_transmit([&](const Packet& p, NodeId tx, Tick now) {
            if (p.kind == PacketKind::Data) data_tx[{p.uid, p.hop_index}].emplace_back(tx, now);
            if (p.kind == PacketKind::BroadcastClaim) {
                const auto& c = std::get<ClaimBody>(p.body);
                if (c.claimer == tx) claims.push_back({tx, c.data_uid, c.layer, now});
            }
        });
    };
    const auto r = harness::run(s, opts);
    o.expect(r.metrics.generated > 0 && r.metrics.delivery_ratio == 1.0, "delivery " + show(r.metrics.delivery_ratio));
    o.expect(r.metrics.adversary_drops > 0, "droppers never dropped");
    std::size_t over = 0;
    for (const auto& [k, v] : data_tx) over += v.size() > 1;
    o.expect(over == 0, std::to_string(over) + " (uid, layer) pairs sent more than once");
    o.expect(!claims.empty(), "no claims issued");
    // Every secondary may claim the same layer; only one copy may follow.
    std::map<std::pair<std::uint64_t, std::uint32_t>, std::pair<Tick, std::set<NodeId>>> claimed;
    for (const auto& c : claims) {
        auto [it, fresh] = claimed.try_emplace({c.uid, c.layer}, c.at, std::set<NodeId>{});
        it->second.first = std::min(it->second.first, c.at);
        it->second.second.insert(c.claimer);
    }
    std::size_t duplicates = 0, outsiders = 0;
    for (const auto& [key, claim] : claimed) {
        const auto it = data_tx.find(key);
        if (it == data_tx.end()) continue;
        std::size_t after = 0;
        for (const auto& [tx, at] : it->second) {
            if (at < claim.first) continue;
            ++after;
            outsiders += !claim.second.contains(tx);
        }
        duplicates += after > 1 ? after - 1 : 0;
    }
    o.expect(outsiders == 0, std::to_string(outsiders) + " forwards by nodes that did not claim");
    o.expect(duplicates == 0, std::to_string(duplicates) + " forwards after a claim");
}

void energy_claim(Outcome& o) {
    auto s = load("energy_one_dropper.json");
    const std::uint64_t header = s.constants.header_bits;
    const std::uint64_t per_bit = s.constants.costs.tx_per_bit;
    o.expect(per_bit == 1000, "transmit cost per bit is " + std::to_string(per_bit));

    auto measure = [&](harness::ProtocolKind kind, std::uint64_t& bits) {
        s.protocol = kind;
        harness::RunOptions opts;
        opts.instrument = [&](Simulator& sim) {
            sim.on_transmit([&](const Packet& p, NodeId, Tick) {
                std::uint64_t bytes = p.payload.size() + body_wire_size(p.body) + 4 * p.route.size();
                if (p.tag) bytes += 16;
                bits += header + 8 * bytes;
            });
        };
        return harness::run(s, opts);
    };
    std::uint64_t nms_bits = 0, mp_bits = 0;
    const auto nms = measure(harness::ProtocolKind::Nms, nms_bits);
    const auto mp = measure(harness::ProtocolKind::Multipath2, mp_bits);
    o.expect(nms.metrics.generated > 0 && nms.metrics.delivery_ratio == mp.metrics.delivery_ratio,
             "delivery differs: " + show(nms.metrics.delivery_ratio) + " vs " + show(mp.metrics.delivery_ratio));
    o.expect(nms.metrics.energy_transmit < mp.metrics.energy_transmit,
             "NMS " + std::to_string(nms.metrics.energy_transmit) + " >= two-path " + std::to_string(mp.metrics.energy_transmit));
    o.expect(nms.metrics.energy_transmit == nms_bits * 1000, "NMS transmit energy is not 1000 per bit");
    o.expect(mp.metrics.energy_transmit == mp_bits * 1000, "two-path transmit energy is not 1000 per bit");
    std::uint64_t per_node = 0;
    for (const auto& n : nms.nodes) per_node += n.energy.transmit;
    o.expect(per_node == nms.metrics.energy_transmit, "per-node transmit energy does not sum to the total");
}

void determinism(Outcome& o) {
    std::vector<std::filesystem::path> files;
    for (const auto& f : std::filesystem::directory_iterator(WSNSEC_SCENARIO_DIR)) {
        if (f.path().extension() == ".json") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    o.expect(files.size() >= 5, "too few scenarios");
    harness::RunOptions opts;
    opts.trace = true;
    for (const auto& f : files) {
        const auto s = harness::load_scenario(f.string());
        const auto a = harness::run(s, opts);
        const auto b = harness::run(s, opts);
        o.expect(harness::to_csv({a.metrics}) == harness::to_csv({b.metrics}), f.filename().string() + ": CSV differs");
        o.expect(a.trace == b.trace, f.filename().string() + ": trace differs");
        o.expect(harness::detections_csv(a) == harness::detections_csv(b), f.filename().string() + ": detections differ");
    }
    harness::SweepSpec spec;
    spec.axis = "adversaries.0.drop_p";
    spec.values = {"0.3", "0.5", "0.8"};
    spec.trace = true;
    const auto base = harness::read_scenario_json(std::string(WSNSEC_SCENARIO_DIR) + "/dri_grayhole_sweep.json");
    const auto serial = harness::sweep(base, spec);
    spec.jobs = 3;
    const auto parallel = harness::sweep(base, spec);
    bool same = serial.size() == parallel.size();
    for (std::size_t i = 0; same && i < serial.size(); ++i) {
        same = harness::csv_row(serial[i].metrics) == harness::csv_row(parallel[i].metrics) && serial[i].trace == parallel[i].trace;
    }
    o.expect(same, "parallel sweep differs from serial");
}

}  // namespace

int main() {
    struct Criterion {
        const char* title;
        std::function<void(Outcome&)> check;
    };
    const Criterion criteria[] = {
        {"key-chain example: lost K1 disclosure, K2 releases P1..P3", replay_key_chain_example},
        {"broadcast authentication soundness", mutesla_soundness},
        {"pairwise encryption suite", snep_suite},
        {"membership proofs", merkle_suite},
        {"DRI table and ProbeCheck statuses", dri_tables},
        {"grayhole flag rate p^3 and zero false positives", detection_rate},
        {"collusion: FRq trusted, DRI blacklists and restores delivery", collusion_pair},
        {"monitor bypass of two droppers", nms_bypass},
        {"monitoring beats two-path redundancy on transmit energy", energy_claim},
        {"determinism", determinism},
    };
    const auto start = std::chrono::steady_clock::now();
    int failed = 0, index = 0;
    for (const auto& c : criteria) {
        ++index;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.check(o);
        } catch (const std::exception& e) {
            o.expect(false, std::string("exception: ") + e.what());
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        failed += o.failed();
        std::cout << (o.failed() ? "FAIL" : "PASS") << " criterion " << index << ": " << c.title << " (" << ms << " ms)";
        if (o.failed()) std::cout << " -- " << o.summary();
        std::cout << std::endl;
    }
    const auto total = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    std::cout << (failed ? "FAILED " : "PASSED ") << (10 - failed) << "/10 in " << total << " ms" << std::endl;
    return failed ? 1 : 0;
}
