#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "wsnsec/core/clock.hpp"
#include "wsnsec/core/energy.hpp"
#include "wsnsec/core/event_queue.hpp"
#include "wsnsec/core/rng.hpp"
#include "wsnsec/core/simulator.hpp"
#include "wsnsec/core/topology.hpp"

using namespace wsnsec;

namespace {

// Adjacency of node 7 in the detection example network: 1, 2, 6, 8, 9.
TopologySpec detection_example_edges() {
    return TopologySpec::explicit_edges(10, {{7, 1}, {7, 2}, {7, 6}, {7, 8}, {7, 9}, {1, 2}, {1, 6}, {1, 8}, {1, 9},
                                             {2, 3}, {3, 4}, {4, 5}, {5, 6}, {0, 8}, {0, 9}});
}

}  // namespace

TEST_SUITE("topology") {
    TEST_CASE("single node has no neighbors") {
        auto topo = build_topology(TopologySpec::explicit_edges(1, {}));
        CHECK(topo.size() == 1);
        CHECK(topo.neighbors(NodeId{0}).empty());
        CHECK(topo.edge_count() == 0);
    }

    TEST_CASE("explicit edges give node 7 exactly its table rows") {
        auto topo = build_topology(detection_example_edges());
        CHECK(topo.neighbors(NodeId{7}) == make_ids({1, 2, 6, 8, 9}));
        CHECK(topo.adjacent(NodeId{1}, NodeId{7}));
        CHECK_FALSE(topo.adjacent(NodeId{7}, NodeId{7}));
    }

    TEST_CASE("unit-disk adjacency matches all-pairs distance oracle") {
        Rng rng(42);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<Position> pos;
            for (int i = 0; i < 20; ++i) pos.push_back({rng.uniform01() * 100.0, rng.uniform01() * 100.0});
            const double range = 20.0 + 10.0 * trial;
            auto topo = build_topology(TopologySpec::unit_disk(pos, range));
            for (std::uint32_t a = 0; a < 20; ++a) {
                for (std::uint32_t b = 0; b < 20; ++b) {
                    const bool expect = a != b && std::hypot(pos[a].x - pos[b].x, pos[a].y - pos[b].y) <= range;
                    CHECK(topo.adjacent(NodeId{a}, NodeId{b}) == expect);
                }
            }
        }
    }

    TEST_CASE("adjacency is symmetric and irreflexive") {
        auto topo = build_topology(detection_example_edges());
        for (std::uint32_t a = 0; a < topo.size(); ++a) {
            for (NodeId b : topo.neighbors(NodeId{a})) {
                CHECK(b != NodeId{a});
                CHECK(topo.adjacent(b, NodeId{a}));
            }
        }
    }

    TEST_CASE("construction errors") {
        TopologySpec dup = TopologySpec::explicit_edges(3, {});
        dup.node_ids = {0, 1, 1};
        CHECK_THROWS_AS(build_topology(dup), std::invalid_argument);
        CHECK_THROWS_AS(build_topology(TopologySpec::explicit_edges(3, {{0, 5}})), std::invalid_argument);
        CHECK_THROWS_AS(build_topology(TopologySpec::explicit_edges(3, {{1, 1}})), std::invalid_argument);
        CHECK_THROWS_AS(build_topology(TopologySpec::unit_disk({{0, 0}}, 0.0)), std::invalid_argument);
    }

    TEST_CASE("bfs hops on a line") {
        auto topo = build_topology(TopologySpec::explicit_edges(4, {{0, 1}, {1, 2}, {2, 3}}));
        auto hops = topo.bfs_hops(NodeId{0});
        CHECK(*hops[3] == 3);
        auto cut = topo.bfs_hops(NodeId{0}, {NodeId{2}});
        CHECK_FALSE(cut[3].has_value());
    }
}

TEST_SUITE("event queue") {
    TEST_CASE("earlier tick pops first") {
        EventQueue q;
        q.schedule(5, TimerFire{NodeId{0}, 1});
        q.schedule(3, TimerFire{NodeId{0}, 2});
        auto ev = q.advance();
        REQUIRE(ev);
        CHECK(ev->fire_time == 3);
        CHECK(q.now() == 3);
    }

    TEST_CASE("same tick fires in scheduling order") {
        EventQueue q;
        q.schedule(4, TimerFire{NodeId{0}, 10});
        q.schedule(4, TimerFire{NodeId{0}, 11});
        CHECK(std::get<TimerFire>(q.advance()->action).token == 10);
        CHECK(std::get<TimerFire>(q.advance()->action).token == 11);
    }

    TEST_CASE("scheduling into the past throws") {
        EventQueue q;
        q.schedule(10, TimerFire{});
        q.advance();
        CHECK_THROWS_AS(q.schedule(9, TimerFire{}), std::logic_error);
    }

    TEST_CASE("replay of 10^4 random events is identical and time never decreases") {
        auto run = [](std::uint64_t seed) {
            EventQueue q;
            Rng rng(seed);
            for (std::uint64_t i = 0; i < 10000; ++i) q.schedule(rng.uniform_int(0, 500), TimerFire{NodeId{0}, i});
            std::vector<std::uint64_t> order;
            Tick last = 0;
            while (auto ev = q.advance()) {
                CHECK(ev->fire_time >= last);
                last = ev->fire_time;
                order.push_back(std::get<TimerFire>(ev->action).token);
            }
            return order;
        };
        const auto a = run(7);
        CHECK(a.size() == 10000);
        CHECK(a == run(7));
    }
}

TEST_SUITE("loose clock") {
    TEST_CASE("epsilon zero means perfect sync") {
        Rng rng(1);
        LooseClock clock(8, 0, rng);
        for (std::uint32_t i = 0; i < 8; ++i) CHECK(clock.local_time(NodeId{i}, 123) == 123);
    }

    TEST_CASE("offsets bounded by epsilon and static over time") {
        Rng rng(99);
        LooseClock clock(200, 3, rng);
        std::set<Tick> seen;
        for (std::uint32_t i = 0; i < 200; ++i) {
            CHECK(std::llabs(clock.offset(NodeId{i})) <= 3);
            seen.insert(clock.offset(NodeId{i}));
            CHECK(clock.local_time(NodeId{i}, 1000) - clock.local_time(NodeId{i}, 10) == 990);
        }
        CHECK(seen.size() == 7);  // all of -3..3 drawn over 200 nodes
    }
}

TEST_SUITE("energy") {
    TEST_CASE("transmit one bit costs 1000 units by default") {
        EnergyMeter m(2);
        m.charge(NodeId{0}, Transmit{1});
        CHECK(m.node(NodeId{0}).transmit == 1000);
        m.charge(NodeId{1}, Transmit{0});
        CHECK(m.node(NodeId{1}).total() == 0);
    }

    TEST_CASE("100-byte packet transmitted then received") {
        EnergyMeter m(2);
        m.charge(NodeId{0}, Transmit{800});
        m.charge(NodeId{1}, Receive{800});
        CHECK(m.totals().total() == 800 * 1000 + 800 * 500);
    }

    TEST_CASE("unknown node throws") {
        EnergyMeter m(1);
        CHECK_THROWS(m.charge(NodeId{3}, Compute{1}));
    }

    TEST_CASE("sum of meter deltas equals charges issued") {
        EnergyMeter m(5);
        Rng rng(3);
        for (int i = 0; i < 1000; ++i) {
            const NodeId n{static_cast<std::uint32_t>(rng.uniform_int(0, 4))};
            switch (rng.uniform_int(0, 2)) {
                case 0: m.charge(n, Transmit{static_cast<std::uint64_t>(rng.uniform_int(0, 2000))}); break;
                case 1: m.charge(n, Receive{static_cast<std::uint64_t>(rng.uniform_int(0, 2000))}); break;
                default: m.charge(n, Compute{static_cast<std::uint64_t>(rng.uniform_int(0, 2000))}); break;
            }
        }
        CHECK(m.totals().total() == m.issued());
    }
}

namespace {

struct Recorder : Protocol {
    std::vector<std::pair<Tick, Delivery>>* log;
    Simulator* sim;
    Recorder(Simulator* s, std::vector<std::pair<Tick, Delivery>>* l) : log(l), sim(s) {}
    void on_receive(const Delivery& d) override { log->emplace_back(sim->now(), d); }
};

}  // namespace

TEST_SUITE("simulator") {
    TEST_CASE("broadcast reaches each neighbor exactly once and no one else") {
        auto topo = build_topology(TopologySpec::explicit_edges(5, {{0, 1}, {0, 2}, {2, 3}, {3, 4}}));
        Simulator sim(topo, RadioConfig{}, 1);
        std::vector<std::pair<Tick, Delivery>> log;
        for (std::uint32_t i = 0; i < 5; ++i) sim.attach<Recorder>(NodeId{i}, &sim, &log);
        Packet p;
        p.kind = PacketKind::Hello;
        p.src = NodeId{0};
        sim.transmit(NodeId{0}, p);
        sim.run_until(100);
        REQUIRE(log.size() == 2);
        CHECK(log[0].second.receiver == NodeId{1});
        CHECK(log[1].second.receiver == NodeId{2});
        CHECK(log[0].first == 1);
    }

    TEST_CASE("energy charges follow packet size") {
        auto topo = build_topology(TopologySpec::explicit_edges(2, {{0, 1}}));
        Simulator sim(topo, RadioConfig{}, 1);
        Packet p;
        p.payload.assign(100, 0xAB);
        p.next_hop = NodeId{1};
        sim.transmit(NodeId{0}, p);
        sim.run_until(10);
        const std::uint64_t bits = 128 + 800;
        CHECK(sim.energy().node(NodeId{0}).transmit == bits * 1000);
        CHECK(sim.energy().node(NodeId{1}).receive == bits * 500);
        CHECK(sim.energy().issued() == sim.energy().totals().total());
    }

    TEST_CASE("timers fire in order and can be cancelled") {
        auto topo = build_topology(TopologySpec::explicit_edges(1, {}));
        Simulator sim(topo, RadioConfig{}, 1);
        std::vector<int> fired;
        sim.schedule_timer(NodeId{0}, 5, [&] { fired.push_back(5); });
        auto t = sim.schedule_timer(NodeId{0}, 3, [&] { fired.push_back(3); });
        sim.schedule_timer(NodeId{0}, 7, [&] { fired.push_back(7); });
        sim.cancel_timer(t);
        sim.run_until(100);
        CHECK(fired == std::vector<int>{5, 7});
    }

    TEST_CASE("lossy links drop about q of receptions") {
        auto topo = build_topology(TopologySpec::explicit_edges(2, {{0, 1}}));
        RadioConfig cfg;
        cfg.link_drop_q = 0.25;
        Simulator sim(topo, cfg, 11);
        std::vector<std::pair<Tick, Delivery>> log;
        sim.attach<Recorder>(NodeId{1}, &sim, &log);
        for (int i = 0; i < 4000; ++i) sim.transmit(NodeId{0}, Packet{});
        sim.run_until(10);
        const double rate = 1.0 - static_cast<double>(log.size()) / 4000.0;
        CHECK(rate == doctest::Approx(0.25).epsilon(0.1));
    }

    TEST_CASE("clock bound holds in the simulator") {
        auto topo = build_topology(TopologySpec::explicit_edges(30, {}));
        RadioConfig cfg;
        cfg.epsilon = 4;
        Simulator sim(topo, cfg, 5);
        for (std::uint32_t i = 0; i < 30; ++i) CHECK(std::llabs(sim.local_time(NodeId{i}) - sim.now()) <= 4);
    }
}

TEST_CASE("derived seeds are independent per label") {
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
}
