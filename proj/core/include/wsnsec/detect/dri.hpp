#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "wsnsec/routing/aodv.hpp"

namespace wsnsec::detect {

struct DriEntry {
    bool from = false;     // relayed data that came from this neighbor
    bool through = false;  // relayed data to this neighbor
    std::uint32_t rts_count = 0;
    std::uint32_t cts_count = 0;
    bool check_bit = false;
    std::optional<Tick> cleared_at;

    /// rts/cts, or nullopt when no CTS was counted.
    std::optional<double> rts_cts_ratio() const noexcept;
};

enum class Direction : std::uint8_t { From, Through };
enum class Handshake : std::uint8_t { Rts, Cts };

/// Per-neighbor forwarding evidence held by one node.
class DriTable {
public:
    DriTable() = default;
    explicit DriTable(const std::vector<NodeId>& neighbors);

    /// Throws std::invalid_argument for a node that is not a neighbor.
    void record(NodeId neighbor, Direction direction);
    void record_rts_cts(NodeId neighbor, Handshake which);
    void set_check_bit(NodeId neighbor, Tick now);

    bool contains(NodeId neighbor) const { return entries_.contains(neighbor); }
    const DriEntry& at(NodeId neighbor) const;
    const std::map<NodeId, DriEntry>& entries() const noexcept { return entries_; }

private:
    DriEntry& mutable_at(NodeId neighbor);
    std::map<NodeId, DriEntry> entries_;
};

/// Neighbors with neither From nor Through evidence. A neighbor whose
/// CheckBit was set within the last `threshold_interval` ticks is skipped,
/// as is every node in `exclude`.
std::vector<NodeId> select_suspects(const DriTable& table, Tick now, Tick threshold_interval,
                                    const std::set<NodeId>& exclude = {});

/// Most-interacted non-suspect neighbor (max from+through, lowest id on
/// ties); nullopt when no neighbor has any evidence.
std::optional<NodeId> select_cooperative_node(const DriTable& table, const std::vector<NodeId>& suspects,
                                              const std::set<NodeId>& exclude = {});

/// Which suspect-neighbors notified the initiator and whether any of their
/// further probes arrived.
class ProbeCheckTable {
public:
    void record_probe(NodeId sender) { probes_.insert(sender); }
    void record_notification(NodeId sender) { notified_.insert(sender); }

    /// Only notifying nodes have a status.
    std::map<NodeId, bool> statuses() const;
    std::vector<NodeId> flagged() const;

private:
    std::set<NodeId> probes_;
    std::set<NodeId> notified_;
};

struct SuspicionVerdict {
    NodeId initiator;
    NodeId suspect;
    std::uint32_t round_id = 0;
    Tick started = 0;
    Tick tick = 0;
    std::map<NodeId, bool> statuses;
    std::vector<NodeId> flagged;
};

/// Blacklists the suspect when any neighbor was flagged. Returns true if the
/// blacklist changed.
bool blacklist_update(std::set<NodeId>& blacklist, const SuspicionVerdict& verdict);

enum class LocalOutcome : std::uint8_t { Cleared, Escalated, Inconclusive };

std::string_view to_string(LocalOutcome o) noexcept;

struct LocalCheckRecord {
    Tick tick = 0;
    NodeId suspect;
    NodeId cooperative;
    LocalOutcome outcome = LocalOutcome::Inconclusive;
};

struct DriConfig {
    Tick threshold_interval = 200;
    Tick probe_slack = 10;
    Tick probe_spacing = 5;
    std::uint32_t further_probes = 3;
    Tick query_timeout = 100;
    Tick round_timeout = 150;
    /// Periodic suspicion scans; disable to drive rounds by hand.
    bool scanning = true;
    /// Blacklist on a verdict with at least one flag.
    bool blacklist_on_flag = true;
};

/// Grayhole detection at one node, layered on its AODV-lite agent.
class DriAgent : public Protocol {
public:
    using VerdictListener = std::function<void(const SuspicionVerdict&)>;
    using LocalListener = std::function<void(const LocalCheckRecord&)>;

    DriAgent(Simulator& sim, routing::AodvAgent& aodv, DriConfig config, adversary::Adversary* adversary = nullptr,
             DetectionLog* detections = nullptr);

    void start() override;
    void on_receive(const Delivery&) override {}

    DriTable& table() noexcept { return table_; }
    const DriTable& table() const noexcept { return table_; }
    const std::set<NodeId>& blacklist() const noexcept { return aodv_.blacklist_set(); }

    /// One suspicion scan: local checks where a CN exists, cooperative
    /// detection otherwise.
    void scan();
    void start_local_check(NodeId suspect, NodeId cooperative);
    /// Starts a cooperative round; returns its id.
    std::uint32_t start_cooperative(NodeId suspect);

    void add_verdict_listener(VerdictListener l) { verdict_listeners_.push_back(std::move(l)); }
    void add_local_listener(LocalListener l) { local_listeners_.push_back(std::move(l)); }

    const std::vector<SuspicionVerdict>& verdicts() const noexcept { return verdicts_; }
    const std::vector<LocalCheckRecord>& local_checks() const noexcept { return local_checks_; }
    bool busy_with(NodeId suspect) const { return in_progress_.contains(suspect); }

private:
    struct Round {
        NodeId suspect;
        Tick started = 0;
        ProbeCheckTable table;
    };

    void schedule_scan();
    void send_avoiding(Packet packet, NodeId avoid);
    void on_coop_request(const Delivery& d);
    void on_further_probe(const Delivery& d);
    void on_notification(const Delivery& d);
    void on_probe(const Delivery& d);
    void on_probe_query(const Delivery& d);
    void on_probe_reply(const Delivery& d);
    void finish_round(std::uint32_t round_id);
    void finish_local(std::uint32_t check_id, LocalOutcome outcome);

    Simulator& sim_;
    routing::AodvAgent& aodv_;
    NodeId self_;
    DriConfig config_;
    adversary::Adversary* adversary_;
    DetectionLog* detections_;
    DriTable table_;

    std::set<NodeId> in_progress_;
    std::uint32_t round_counter_ = 0;
    std::map<std::uint32_t, Round> rounds_;
    std::set<std::pair<NodeId, std::uint32_t>> joined_rounds_;

    struct LocalCheck {
        NodeId suspect;
        NodeId cooperative;
        std::uint64_t probe_uid = 0;
        std::uint64_t timer = 0;
    };
    std::map<std::uint32_t, LocalCheck> local_;
    std::set<std::uint64_t> probes_received_;

    std::map<std::uint64_t, NodeId> handed_to_;

    std::vector<SuspicionVerdict> verdicts_;
    std::vector<LocalCheckRecord> local_checks_;
    std::vector<VerdictListener> verdict_listeners_;
    std::vector<LocalListener> local_listeners_;
};

}  // namespace wsnsec::detect
