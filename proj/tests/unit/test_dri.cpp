#include <doctest.h>

#include <cmath>
#include <memory>

#include "wsnsec/detect/dri.hpp"

using namespace wsnsec;
using namespace wsnsec::detect;
using adversary::Adversary;
using adversary::AdversaryKind;
using adversary::AdversaryProfile;
using routing::AodvAgent;
using routing::AodvConfig;

namespace {

using Edges = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

const Edges kDriEdges{{7, 1}, {7, 2}, {7, 6}, {7, 8}, {7, 9}, {1, 2}, {1, 6}, {1, 8},
                       {1, 9}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {0, 8}, {0, 9}};
const Edges kCollusionEdges{{0, 1}, {0, 2}, {0, 4}, {1, 4}, {1, 6}, {2, 3}, {3, 5}, {4, 5}, {5, 6}};

struct DriNet {
    std::unique_ptr<Simulator> sim;
    adversary::GroundTruthLedger truth;
    DetectionLog detections;
    std::vector<std::unique_ptr<Adversary>> adversaries;
    std::vector<AodvAgent*> aodv;
    std::vector<DriAgent*> dri;
    std::size_t blindness_violations = 0;

    DriNet(std::uint32_t n, Edges edges, std::vector<AdversaryProfile> profiles, DriConfig cfg, std::uint64_t seed = 1,
           double q = 0.0) {
        RadioConfig radio;
        radio.link_drop_q = q;
        sim = std::make_unique<Simulator>(build_topology(TopologySpec::explicit_edges(n, std::move(edges))), radio,
                                          seed);
        std::vector<Adversary*> by_node(n, nullptr);
        for (auto& p : profiles) {
            adversaries.push_back(std::make_unique<Adversary>(p, seed, &truth));
            by_node[p.node.value] = adversaries.back().get();
        }
        for (std::uint32_t i = 0; i < n; ++i) {
            aodv.push_back(&sim->attach<AodvAgent>(NodeId{i}, *sim, NodeId{i}, AodvConfig{}, by_node[i], &detections));
            dri.push_back(&sim->attach<DriAgent>(NodeId{i}, *sim, *aodv.back(), cfg, by_node[i], &detections));
        }
        // Packets that must stay hidden from the suspect are never addressed
        // to it nor relayed by it.
        sim->on_transmit([this](const Packet& p, NodeId tx, Tick) {
            std::optional<NodeId> suspect;
            if (p.kind == PacketKind::Notification || p.kind == PacketKind::CoopDetectRequest) {
                suspect = std::get<CoopRequestBody>(p.body).suspect;
            } else if (p.kind == PacketKind::ProbeQuery || p.kind == PacketKind::ProbeReply) {
                suspect = std::get<ProbeQueryBody>(p.body).suspect;
            }
            if (suspect && (tx == *suspect || p.next_hop == *suspect)) ++blindness_violations;
        });
    }
};

DriConfig manual() {
    DriConfig c;
    c.scanning = false;
    return c;
}

void replay_table2(DriTable& t) {
    t.record(NodeId{2}, Direction::From);
    t.record(NodeId{8}, Direction::From);
    t.record(NodeId{2}, Direction::Through);
    t.record(NodeId{6}, Direction::Through);
    t.record(NodeId{9}, Direction::Through);
    t.set_check_bit(NodeId{2}, 0);
    t.set_check_bit(NodeId{8}, 0);
    const std::pair<std::uint32_t, std::uint32_t> rts[] = {{1, 15}, {2, 5}, {6, 3}, {8, 6}, {9, 4}};
    for (auto [n, count] : rts) {
        for (std::uint32_t i = 0; i < count; ++i) t.record_rts_cts(NodeId{n}, Handshake::Rts);
        t.record_rts_cts(NodeId{n}, Handshake::Cts);
    }
}

}  // namespace

TEST_SUITE("dri table") {
    TEST_CASE("fresh table has no evidence and suspects everyone") {
        DriTable t(make_ids({1, 2, 6, 8, 9}));
        for (const auto& [n, e] : t.entries()) {
            CHECK_FALSE(e.from);
            CHECK_FALSE(e.through);
            CHECK_FALSE(e.check_bit);
        }
        CHECK(select_suspects(t, 200, 200) == make_ids({1, 2, 6, 8, 9}));
        CHECK_FALSE(select_cooperative_node(t, make_ids({1, 2, 6, 8, 9})));
    }

    TEST_CASE("forwarding one packet from X sets only X.from") {
        DriTable t(make_ids({1, 2}));
        t.record(NodeId{1}, Direction::From);
        CHECK(t.at(NodeId{1}).from);
        CHECK_FALSE(t.at(NodeId{1}).through);
        CHECK_FALSE(t.at(NodeId{2}).from);
    }

    TEST_CASE("unknown neighbor is rejected") {
        DriTable t(make_ids({1}));
        CHECK_THROWS_AS(t.record(NodeId{3}, Direction::From), std::invalid_argument);
        CHECK_THROWS_AS(t.record_rts_cts(NodeId{3}, Handshake::Rts), std::invalid_argument);
    }

    TEST_CASE("worked DRI table written directly at node 7") {
        auto topo = build_topology(TopologySpec::explicit_edges(10, kDriEdges));
        CHECK(topo.neighbors(NodeId{7}) == make_ids({1, 2, 6, 8, 9}));
        DriTable t(topo.neighbors(NodeId{7}));
        replay_table2(t);
        struct Row { std::uint32_t node; bool from, through; double ratio; bool check; };
        const Row expected[] = {{1, 0, 0, 15, 0}, {2, 1, 1, 5, 1}, {6, 0, 1, 3, 0}, {8, 1, 0, 6, 1}, {9, 0, 1, 4, 0}};
        for (const auto& row : expected) {
            const auto& e = t.at(NodeId{row.node});
            CHECK(e.from == row.from);
            CHECK(e.through == row.through);
            CHECK(*e.rts_cts_ratio() == doctest::Approx(row.ratio));
            CHECK(e.check_bit == row.check);
        }
        const auto suspects = select_suspects(t, 200, 200);
        CHECK(suspects == make_ids({1}));
        CHECK(select_cooperative_node(t, suspects) == NodeId{2});
    }

    TEST_CASE("cooperative node tie-break picks the lower id") {
        DriTable t(make_ids({3, 5, 9}));
        for (auto n : {5u, 9u}) {
            t.record(NodeId{n}, Direction::From);
            t.record(NodeId{n}, Direction::Through);
        }
        CHECK(select_cooperative_node(t, make_ids({3})) == NodeId{5});
        CHECK(select_cooperative_node(t, make_ids({3}), {NodeId{5}}) == NodeId{9});
    }

    TEST_CASE("fully interactive neighborhood yields no suspects") {
        DriTable t(make_ids({1, 2}));
        for (auto n : {1u, 2u}) {
            t.record(NodeId{n}, Direction::From);
            t.record(NodeId{n}, Direction::Through);
        }
        CHECK(select_suspects(t, 500, 200).empty());
    }

    TEST_CASE("CheckBit only defers suspicion for one interval") {
        DriTable t(make_ids({4}));
        t.set_check_bit(NodeId{4}, 100);
        CHECK(select_suspects(t, 250, 200).empty());
        CHECK(select_suspects(t, 300, 200) == make_ids({4}));
    }

    TEST_CASE("blacklist update") {
        std::set<NodeId> bl;
        SuspicionVerdict empty{NodeId{7}, NodeId{1}};
        CHECK_FALSE(blacklist_update(bl, empty));
        CHECK(bl.empty());
        SuspicionVerdict one{NodeId{7}, NodeId{1}};
        one.flagged = make_ids({2});
        CHECK(blacklist_update(bl, one));
        CHECK(bl.contains(NodeId{1}));
    }

    TEST_CASE("probe check table") {
        ProbeCheckTable pc;
        pc.record_probe(NodeId{6});
        pc.record_probe(NodeId{5});  // probe without a notification is ignored
        pc.record_notification(NodeId{6});
        pc.record_notification(NodeId{2});
        CHECK(pc.statuses() == std::map<NodeId, bool>{{NodeId{2}, false}, {NodeId{6}, true}});
        CHECK(pc.flagged() == make_ids({2}));
    }
}

TEST_SUITE("dri agent") {
    TEST_CASE("scripted traffic builds node 7 table, then the round flags node 1") {
        AdversaryProfile gh{NodeId{1}, AdversaryKind::Grayhole};
        gh.drop_p = 1.0;
        gh.victims = make_ids({2});
        DriNet net(10, kDriEdges, {gh}, manual());
        auto route = [&](std::vector<std::uint32_t> hops, Tick at) {
            net.sim->schedule_timer(NodeId{hops.front()}, at, [&net, hops] {
                Packet p;
                p.uid = net.sim->next_uid();
                p.kind = PacketKind::Data;
                p.src = NodeId{hops.front()};
                p.dst = NodeId{hops.back()};
                p.ttl = 32;
                for (auto h : hops) p.route.push_back(NodeId{h});
                p.payload = Bytes(8, 1);
                net.aodv[hops.front()]->send_routed(std::move(p));
            });
        };
        route({2, 7, 9, 0}, 1);  // From 2, Through 9
        route({8, 7, 6, 5}, 1);  // From 8, Through 6
        route({8, 7, 2, 3}, 20); // Through 2
        net.sim->run_until(50);
        net.dri[7]->start_local_check(NodeId{2}, NodeId{1});
        net.sim->run_until(100);
        net.dri[7]->start_local_check(NodeId{8}, NodeId{1});
        net.sim->run_until(150);

        const auto& t = net.dri[7]->table();
        struct Row { std::uint32_t node; bool from, through, check; };
        const Row table2[] = {{1, 0, 0, 0}, {2, 1, 1, 1}, {6, 0, 1, 0}, {8, 1, 0, 1}, {9, 0, 1, 0}};
        for (const auto& row : table2) {
            CAPTURE(row.node);
            CHECK(t.at(NodeId{row.node}).from == row.from);
            CHECK(t.at(NodeId{row.node}).through == row.through);
            CHECK(t.at(NodeId{row.node}).check_bit == row.check);
        }
        CHECK(t.at(NodeId{9}).rts_cts_ratio() == doctest::Approx(1.0));

        net.dri[7]->scan();
        net.sim->run_until(1000);
        const auto& checks = net.dri[7]->local_checks();
        REQUIRE(checks.size() == 3);
        CHECK(checks[2].suspect == NodeId{1});
        CHECK(checks[2].cooperative == NodeId{2});
        CHECK(checks[2].outcome == LocalOutcome::Escalated);
        REQUIRE(net.dri[7]->verdicts().size() == 1);
        const std::map<NodeId, bool> table3{{NodeId{2}, false}, {NodeId{6}, true}, {NodeId{8}, true}, {NodeId{9}, true}};
        CHECK(net.dri[7]->verdicts()[0].statuses == table3);
        CHECK(net.dri[7]->blacklist() == std::set<NodeId>{NodeId{1}});
        CHECK(net.blindness_violations == 0);
    }

    TEST_CASE("ProbeCheck statuses when node 1 drops only toward node 2") {
        AdversaryProfile gh{NodeId{1}, AdversaryKind::Grayhole};
        gh.drop_p = 1.0;
        gh.victims = make_ids({2});
        DriNet net(10, kDriEdges, {gh}, manual());
        replay_table2(net.dri[7]->table());
        net.dri[7]->scan();
        net.sim->run_until(1000);

        const auto& checks = net.dri[7]->local_checks();
        REQUIRE(checks.size() == 1);
        CHECK(checks[0].suspect == NodeId{1});
        CHECK(checks[0].cooperative == NodeId{2});
        CHECK(checks[0].outcome == LocalOutcome::Escalated);

        const auto& verdicts = net.dri[7]->verdicts();
        REQUIRE(verdicts.size() == 1);
        const std::map<NodeId, bool> table3{{NodeId{2}, false}, {NodeId{6}, true}, {NodeId{8}, true}, {NodeId{9}, true}};
        CHECK(verdicts[0].statuses == table3);
        CHECK(verdicts[0].flagged == make_ids({2}));
        CHECK(net.dri[7]->blacklist().contains(NodeId{1}));
        CHECK(net.blindness_violations == 0);
    }

    TEST_CASE("honest suspect passes the local check and gets its CheckBit") {
        DriNet net(10, kDriEdges, {}, manual());
        replay_table2(net.dri[7]->table());
        net.dri[7]->scan();
        net.sim->run_until(1000);
        REQUIRE(net.dri[7]->local_checks().size() == 1);
        CHECK(net.dri[7]->local_checks()[0].outcome == LocalOutcome::Cleared);
        CHECK(net.dri[7]->table().at(NodeId{1}).check_bit);
        CHECK(net.dri[7]->verdicts().empty());
    }

    TEST_CASE("honest suspect, lossless links: a cooperative round flags nobody") {
        DriNet net(10, kDriEdges, {}, manual());
        net.dri[7]->start_cooperative(NodeId{1});
        net.sim->run_until(1000);
        REQUIRE(net.dri[7]->verdicts().size() == 1);
        const auto& v = net.dri[7]->verdicts()[0];
        CHECK(v.statuses.size() == 4);
        CHECK(v.flagged.empty());
        CHECK(net.dri[7]->blacklist().empty());
    }

    TEST_CASE("no cooperative node escalates straight to cooperative detection") {
        DriNet net(10, kDriEdges, {AdversaryProfile{NodeId{1}, AdversaryKind::Blackhole}}, manual());
        net.dri[7]->scan();  // empty table: every neighbor is a suspect
        net.sim->run_until(1000);
        CHECK(net.dri[7]->local_checks().empty());
        CHECK(net.dri[7]->verdicts().size() == 5);
        CHECK(net.dri[7]->blacklist() == std::set<NodeId>{NodeId{1}});
        CHECK(net.blindness_violations == 0);
    }

    TEST_CASE("post-blacklist rediscovery excludes the suspect") {
        DriNet net(10, kDriEdges, {AdversaryProfile{NodeId{1}, AdversaryKind::Blackhole}}, manual());
        net.dri[7]->start_cooperative(NodeId{1});
        net.sim->run_until(300);
        REQUIRE(net.dri[7]->blacklist().contains(NodeId{1}));
        std::optional<routing::DiscoveryResult> got;
        net.aodv[7]->discover(NodeId{2}, {}, [&](auto r) { got = r; });
        net.sim->run_until(600);
        REQUIRE(got);
        CHECK(std::find(got->path.begin(), got->path.end(), NodeId{1}) == got->path.end());
    }

    TEST_CASE("local check escalates at the grayhole drop rate") {
        // IN 0, SN 1, CN 2 in a triangle.
        const double p = 0.5;
        AdversaryProfile gh{NodeId{1}, AdversaryKind::Grayhole};
        gh.drop_p = p;
        DriConfig cfg = manual();
        cfg.blacklist_on_flag = false;  // a blacklisted SN can no longer answer the check
        DriNet net(3, {{0, 1}, {1, 2}, {0, 2}}, {gh}, cfg, 99);
        auto* in = net.dri[0];
        int escalated = 0, total = 0, inconclusive = 0;
        const int rounds = 1000;
        std::function<void()> next = [&] {
            if (total < rounds) in->start_local_check(NodeId{1}, NodeId{2});
        };
        in->add_local_listener([&](const LocalCheckRecord& r) {
            ++total;
            inconclusive += r.outcome == LocalOutcome::Inconclusive;
            if (r.outcome == LocalOutcome::Escalated) {
                ++escalated;
            } else {
                net.sim->schedule_timer(NodeId{0}, 1, next);
            }
        });
        in->add_verdict_listener([&](const SuspicionVerdict&) { net.sim->schedule_timer(NodeId{0}, 1, next); });
        next();
        net.sim->run_until(1'000'000'000);
        CHECK(total == rounds);
        CHECK(inconclusive == 0);
        INFO("escalated " << escalated << " inconclusive " << inconclusive << " of " << total);
        CHECK(std::abs(double(escalated) / total - p) <= 0.05);
    }

    TEST_CASE("per-neighbor flag rate follows p^3 and round detection 1-(1-p^3)^m") {
        // IN 0 and SN 1 share four neighbors 2..5.
        const Edges star{{0, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};
        DriConfig cfg = manual();
        cfg.blacklist_on_flag = false;
        for (double p : {0.3, 0.5, 0.8}) {
            CAPTURE(p);
            AdversaryProfile gh{NodeId{1}, AdversaryKind::Grayhole};
            gh.drop_p = p;
            DriNet net(6, star, {gh}, cfg, 1234);
            const int rounds = 10000;
            int done = 0;
            std::size_t flags = 0, entries = 0, detected = 0;
            net.dri[0]->add_verdict_listener([&](const SuspicionVerdict& v) {
                ++done;
                entries += v.statuses.size();
                flags += v.flagged.size();
                detected += !v.flagged.empty();
                if (done < rounds) net.sim->schedule_timer(NodeId{0}, 1, [&] { net.dri[0]->start_cooperative(NodeId{1}); });
            });
            net.dri[0]->start_cooperative(NodeId{1});
            net.sim->run_until(1'000'000'000);
            REQUIRE(done == rounds);
            CHECK(entries == 4u * rounds);
            const double p3 = p * p * p;
            CHECK(std::abs(double(flags) / double(entries) - p3) <= 0.03);
            CHECK(std::abs(double(detected) / rounds - (1 - std::pow(1 - p3, 4))) <= 0.04);
        }
    }

    TEST_CASE("colluding pair: DRI blacklists B1 and delivery recovers") {
        AdversaryProfile b1{NodeId{4}, AdversaryKind::CoopBlackhole};
        b1.partner = NodeId{5};
        AdversaryProfile b2{NodeId{5}, AdversaryKind::CoopBlackhole};
        b2.partner = NodeId{4};
        DriNet net(7, kCollusionEdges, {b1, b2}, DriConfig{});
        for (int i = 0; i < 150; ++i) {
            net.sim->schedule_timer(NodeId{0}, 10 + 10 * i, [&] { net.aodv[0]->send_data(NodeId{6}, Bytes(16, 3)); });
        }
        net.sim->run_until(2000);
        REQUIRE(net.aodv[0]->blacklisted(NodeId{4}));
        std::optional<Tick> blacklisted_at;
        for (const auto& e : net.detections.events()) {
            if (e.initiator == NodeId{0} && e.suspect == NodeId{4}) blacklisted_at = e.tick;
            CHECK(net.truth.is_adversary(e.suspect));
        }
        REQUIRE(blacklisted_at);
        std::size_t after = 0, delivered_after = 0;
        for (const auto& [uid, e] : net.sim->data_ledger().entries()) {
            if (e.generated_at <= *blacklisted_at) continue;
            ++after;
            delivered_after += e.delivered_at.has_value();
        }
        CHECK(after > 50);
        CHECK(delivered_after == after);
        CHECK(net.blindness_violations == 0);
    }

    TEST_CASE("zero false positives across seeds with an honest suspect") {
        const Edges star{{0, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};
        std::size_t flagged = 0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            DriNet net(6, star, {}, manual(), seed);
            net.dri[0]->start_cooperative(NodeId{1});
            net.sim->run_until(500);
            REQUIRE(net.dri[0]->verdicts().size() == 1);
            flagged += net.dri[0]->verdicts()[0].flagged.size();
        }
        CHECK(flagged == 0);
    }
}
