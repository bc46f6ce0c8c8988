#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wsnsec/adversary/adversary.hpp"
#include "wsnsec/core/detection.hpp"
#include "wsnsec/core/simulator.hpp"
#include "wsnsec/crypto/primitives.hpp"

namespace wsnsec::nms {

/// Verdict on the claim "v is adjacent to x" at an observer.
enum class ClaimStatus : std::uint8_t {
    Verified,      // confirmed by a source other than v
    Unverifiable,  // only v itself vouches for it
    Refuted,       // contradicted, or x is unknown around here
};

/// What a node learned from hellos and neighbor-list exchanges.
class NeighborKnowledge {
public:
    explicit NeighborKnowledge(NodeId self) : self_(self) {}

    NodeId self() const noexcept { return self_; }
    const std::set<NodeId>& one_hop() const noexcept { return one_hop_; }
    const std::map<NodeId, std::set<NodeId>>& two_hop() const noexcept { return two_hop_; }

    void heard_hello(NodeId from) { one_hop_.insert(from); }
    /// Direct list from a 1-hop neighbor. Lists from strangers are ignored.
    void heard_list(NodeId owner, const std::vector<NodeId>& neighbors);
    /// `relayer` forwards the list it received from `owner`.
    void heard_relayed(NodeId relayer, NodeId owner, const std::vector<NodeId>& neighbors);

    /// Verified when x is us and v is our neighbor, or x's own list (heard
    /// directly or relayed by a neighbor other than v) names v. A true
    /// neighbor of v is within two hops of us, so its list reaches us through
    /// someone; if that someone is only v the claim is unverifiable.
    ClaimStatus assess(NodeId v, NodeId x) const;
    bool verified(NodeId v, NodeId x) const { return assess(v, x) == ClaimStatus::Verified; }

private:
    NodeId self_;
    std::set<NodeId> one_hop_;
    std::map<NodeId, std::set<NodeId>> two_hop_;
    std::map<NodeId, std::map<NodeId, std::set<NodeId>>> lists_;  // owner -> relayer (or owner) -> list
};

/// Cluster keys a node holds: its own plus those of its radio neighbors.
class ClusterKeyring {
public:
    ClusterKeyring() = default;
    ClusterKeyring(NodeId self, crypto::Key own) : self_(self) { keys_.emplace(self, own); }

    void add(NodeId owner, const crypto::Key& key) { keys_.insert_or_assign(owner, key); }
    const crypto::Key* key_of(NodeId owner) const;
    const crypto::Key& own() const { return keys_.at(self_); }
    bool holds(NodeId owner) const { return keys_.contains(owner); }

private:
    NodeId self_;
    std::map<NodeId, crypto::Key> keys_;
};

crypto::Key cluster_key(const crypto::Key& master, NodeId owner);

/// Every node receives its own cluster key and the keys of its topology
/// neighbors.
std::vector<ClusterKeyring> provision_cluster_keys(const Topology& topology, const crypto::Key& master);

enum class MonitorRole : std::uint8_t { Primary, Secondary };

struct MonitorEntry {
    std::uint64_t uid = 0;
    Bytes plaintext;
    NodeId watched;      // forwarder expected to transmit next
    std::uint32_t layer = 0;  // hop index of the buffered transmission
    Tick deadline = 0;
    MonitorRole role = MonitorRole::Primary;
    NodeId source;
    NodeId destination;
    std::uint32_t ttl = 0;
};

/// Buffered copies keyed by uid. A node holds at most one entry per uid.
class MonitorBuffer {
public:
    void insert(MonitorEntry entry);
    MonitorEntry* find(std::uint64_t uid);
    const MonitorEntry* find(std::uint64_t uid) const;
    bool erase(std::uint64_t uid);
    std::size_t size() const noexcept { return entries_.size(); }
    const std::map<std::uint64_t, MonitorEntry>& entries() const noexcept { return entries_; }

private:
    std::map<std::uint64_t, MonitorEntry> entries_;
};

/// Hop distance to the base station for every node.
struct GradientTable {
    std::vector<std::optional<std::uint32_t>> hops;

    static GradientTable from_bfs(const Topology& topology, NodeId base, const std::unordered_set<NodeId>& excluded = {});
    /// Neighbors with strictly smaller hop count than `node`.
    std::vector<NodeId> candidates(const Topology& topology, NodeId node) const;
};

/// Among non-blacklisted neighbors whose hop count is strictly below
/// `own_hops`, the one with the smallest count; lowest id on ties.
std::optional<NodeId> next_hop_select(std::uint32_t own_hops, const std::map<NodeId, std::uint32_t>& neighbor_hops,
                                      const std::set<NodeId>& blacklist, const std::set<NodeId>& exclude = {});
std::optional<NodeId> next_hop_select(const GradientTable& gradient, const Topology& topology, NodeId node,
                                      const std::set<NodeId>& blacklist);

struct NmsConfig {
    NodeId base_station{0};
    Tick hello_at = 0;
    Tick list_at = 2;
    Tick relay_at = 4;
    Tick beacon_at = 6;
    Tick monitor_timeout = 8;
    /// Extra wait for the primary so a secondary's claim can arrive first.
    Tick primary_grace = 6;
    Tick claim_settle = 3;
    std::uint32_t strike_limit = 3;
    bool monitoring = true;
    std::uint64_t crypto_instructions = 1000;
};

struct NmsCounters {
    std::uint64_t promotions = 0;   // secondaries that won a claim and forwarded
    std::uint64_t reroutes = 0;     // primary timeouts that picked another hop
    std::uint64_t claims = 0;       // claims originated
    std::uint64_t undecryptable = 0;
    std::uint64_t decrypted = 0;
    std::uint64_t confirmations = 0;
    std::uint64_t abstentions = 0;  // forwards whose next hop could not be checked
    std::uint64_t routing_failures = 0;
};

/// Monitored single-path forwarding toward the base station.
class NmsAgent : public Protocol {
public:
    NmsAgent(Simulator& sim, NodeId self, NmsConfig config, ClusterKeyring keys, adversary::Adversary* adversary,
             DetectionLog* detections);

    void start() override;
    void on_receive(const Delivery& d) override;

    /// Originates a data packet toward the base station; returns its uid.
    std::uint64_t send_data(Bytes payload);

    NodeId self() const noexcept { return self_; }
    const NeighborKnowledge& knowledge() const noexcept { return knowledge_; }
    std::optional<std::uint32_t> hops() const noexcept { return hops_; }
    const std::map<NodeId, std::uint32_t>& neighbor_hops() const noexcept { return neighbor_hops_; }
    std::optional<NodeId> next_hop(const std::set<NodeId>& exclude = {}) const;
    const std::set<NodeId>& blacklist() const noexcept { return blacklist_; }
    const std::map<NodeId, std::uint32_t>& strikes() const noexcept { return strikes_; }
    const MonitorBuffer& buffer() const noexcept { return buffer_; }
    const NmsCounters& counters() const noexcept { return counters_; }
    const ClusterKeyring& keys() const noexcept { return keys_; }

private:
    bool is_adversary() const;
    void broadcast_beacon(std::uint32_t hops);
    void on_data(const Delivery& d);
    void on_claim(const Delivery& d);
    void transmit_data(std::uint64_t uid, NodeId source, NodeId destination, std::uint32_t ttl, const Bytes& plaintext,
                       NodeId next, std::uint32_t hop_index, bool tamper);
    void buffer_primary(std::uint64_t uid, NodeId source, NodeId destination, std::uint32_t ttl, const Bytes& plaintext,
                        NodeId next, std::uint32_t hop_index);
    void arm(std::uint64_t uid, Tick delay);
    void on_deadline(std::uint64_t uid);
    void settle(std::uint64_t uid);
    void strike(NodeId v);
    std::optional<Bytes> open(const Packet& p, NodeId transmitter);

    Simulator& sim_;
    NodeId self_;
    NmsConfig config_;
    ClusterKeyring keys_;
    adversary::Adversary* adversary_;
    DetectionLog* detections_;

    NeighborKnowledge knowledge_;
    std::map<NodeId, std::vector<NodeId>> lists_heard_;
    std::optional<std::uint32_t> hops_;
    std::map<NodeId, std::uint32_t> neighbor_hops_;
    bool beacon_sent_ = false;

    MonitorBuffer buffer_;
    std::unordered_map<std::uint64_t, std::uint64_t> timers_;
    std::set<std::uint64_t> claiming_;             // uids with our claim pending
    using ClaimKey = std::pair<std::uint64_t, std::uint32_t>;  // (uid, layer)
    std::map<ClaimKey, NodeId> lowest_claim_;
    std::map<ClaimKey, NodeId> relayed_claim_;
    std::map<NodeId, std::uint32_t> strikes_;
    std::set<NodeId> blacklist_;
    NmsCounters counters_;
};

}  // namespace wsnsec::nms
