#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "wsnsec/adversary/adversary.hpp"
#include "wsnsec/core/detection.hpp"
#include "wsnsec/core/simulator.hpp"

namespace wsnsec::routing {

struct AodvConfig {
    Tick route_ttl = 500;
    Tick discovery_timeout = 40;
    /// Wait for replies to a one-hop (neighbors-only) request.
    Tick local_timeout = 6;
    std::uint32_t discovery_retries = 2;
    Tick frp_timeout = 100;
    std::uint32_t data_ttl = 32;
    /// Run the FRq/FRp check on replies from intermediate nodes.
    bool frq_check = false;
    std::uint32_t frq_attempts = 3;
};

struct Route {
    std::vector<NodeId> path;  // self first, destination last
    Tick expires = 0;
    std::uint32_t seq = 0;

    NodeId next_hop() const { return path.size() > 1 ? path[1] : path.front(); }
    std::uint32_t hop_count() const noexcept { return static_cast<std::uint32_t>(path.size() - 1); }
    bool contains(NodeId n) const;
};

class RouteTable {
public:
    explicit RouteTable(NodeId self);

    /// Throws std::invalid_argument unless path runs from self to dst.
    void install(NodeId dst, std::vector<NodeId> path, Tick expires, std::uint32_t seq = 0);
    /// Unexpired route, or nullptr. The route to self has hop count 0.
    const Route* lookup(NodeId dst, Tick now) const;
    void erase(NodeId dst);
    /// Drops every route whose path contains `node`; returns how many.
    std::size_t purge_containing(NodeId node);
    std::size_t size() const noexcept { return routes_.size(); }

private:
    NodeId self_;
    Route self_route_;
    std::map<NodeId, Route> routes_;
};

struct DiscoveryOptions {
    /// Nodes that must not appear in the accepted path.
    std::vector<NodeId> avoid;
    /// Address the request to this single neighbor.
    std::optional<NodeId> ask_only;
    /// Recipients answer if they can but never re-flood.
    bool neighbors_only = false;
    /// Accept only replies produced by this responder.
    std::optional<NodeId> accept_from;
    bool use_cache = true;
    bool install = true;
};

struct DiscoveryResult {
    std::vector<NodeId> path;
    NodeId responder;
};

using DiscoveryCallback = std::function<void(std::optional<DiscoveryResult>)>;

enum class FrqOutcome : std::uint8_t { Trusted, Flagged, Inconclusive };

std::string_view to_string(FrqOutcome o) noexcept;

struct FrqVerdict {
    Tick tick = 0;
    NodeId responder;  // B1
    NodeId next_hop;   // B2
    NodeId destination;
    FrqOutcome outcome = FrqOutcome::Inconclusive;
};

/// AODV-lite: flooded requests with duplicate suppression, replies along the
/// recorded reverse path, and source-routed forwarding of everything that
/// carries an explicit route.
class AodvAgent : public Protocol {
public:
    using RelayListener = std::function<void(const Packet&, NodeId from, NodeId to)>;
    using LocalHandler = std::function<void(const Delivery&)>;
    using UnicastListener = std::function<void(const Packet&)>;
    using OverhearListener = std::function<void(const Delivery&)>;

    AodvAgent(Simulator& sim, NodeId self, AodvConfig config, adversary::Adversary* adversary = nullptr,
              DetectionLog* detections = nullptr);

    NodeId self() const noexcept { return self_; }
    const AodvConfig& config() const noexcept { return config_; }

    void on_receive(const Delivery& delivery) override;

    void discover(NodeId target, DiscoveryOptions options, DiscoveryCallback done);

    /// Originates a data packet; it waits for a route if none is cached.
    /// Returns the packet uid.
    std::uint64_t send_data(NodeId dst, Bytes payload);

    /// Transmits a packet along `packet.route`, which must start at self.
    void send_routed(Packet packet);

    void blacklist(NodeId node);
    bool blacklisted(NodeId node) const { return blacklist_.contains(node); }
    const std::set<NodeId>& blacklist_set() const noexcept { return blacklist_; }

    RouteTable& routes() noexcept { return routes_; }
    const RouteTable& routes() const noexcept { return routes_; }

    void add_relay_listener(RelayListener l) { relay_listeners_.push_back(std::move(l)); }
    void add_unicast_listener(UnicastListener l) { unicast_listeners_.push_back(std::move(l)); }
    void add_overhear_listener(OverhearListener l) { overhear_listeners_.push_back(std::move(l)); }
    void set_local_handler(PacketKind kind, LocalHandler h) { local_handlers_[kind] = std::move(h); }

    const std::vector<FrqVerdict>& frq_verdicts() const noexcept { return frq_verdicts_; }

private:
    struct PendingDiscovery {
        NodeId target;
        DiscoveryOptions options;
        DiscoveryCallback done;
        std::uint64_t timer = 0;
        std::uint32_t attempts = 0;
    };

    void start_attempt(PendingDiscovery pending);
    void handle_rreq(const Delivery& d);
    void handle_rrep(const Delivery& d);
    void handle_frq(const Delivery& d);
    void handle_frp(const Delivery& d);
    void relay(const Delivery& d);
    /// Hands a relayed packet to our own route toward its destination.
    void forward_own(Packet packet);
    void reply(const RreqBody& req, std::vector<NodeId> claimed_path, bool forged);
    void learn_reverse(const std::vector<NodeId>& path_in);
    bool acceptable(const std::vector<NodeId>& path, const std::vector<NodeId>& avoid) const;
    std::vector<NodeId> avoid_with_blacklist(std::vector<NodeId> avoid) const;

    void discover_for_data(NodeId dst);
    void run_frq(NodeId dst, DiscoveryResult result);
    void finish_frq(NodeId dst, std::uint32_t query_id, FrqOutcome outcome);
    void flush(NodeId dst);
    void fail_pending(NodeId dst);
    void transmit_unicast(Packet packet);

    Simulator& sim_;
    NodeId self_;
    AodvConfig config_;
    adversary::Adversary* adversary_;
    DetectionLog* detections_;
    RouteTable routes_;
    std::set<NodeId> blacklist_;

    std::uint32_t request_counter_ = 0;
    std::uint32_t own_seq_ = 0;
    std::set<std::pair<NodeId, std::uint32_t>> seen_requests_;
    std::map<std::uint32_t, PendingDiscovery> discoveries_;

    std::map<NodeId, std::vector<Packet>> pending_data_;
    std::set<NodeId> data_discovery_active_;
    std::map<NodeId, std::uint32_t> frq_attempts_;
    std::map<NodeId, std::vector<NodeId>> frq_extra_avoid_;

    struct PendingFrq {
        NodeId dst;
        DiscoveryResult candidate;
        NodeId b1;
        NodeId b2;
        std::uint64_t timer = 0;
    };
    std::uint32_t query_counter_ = 0;
    std::map<std::uint32_t, PendingFrq> frq_pending_;
    std::vector<FrqVerdict> frq_verdicts_;

    std::vector<RelayListener> relay_listeners_;
    std::vector<UnicastListener> unicast_listeners_;
    std::vector<OverhearListener> overhear_listeners_;
    std::map<PacketKind, LocalHandler> local_handlers_;
};

}  // namespace wsnsec::routing
