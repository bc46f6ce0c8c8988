#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsnsec/core/detection.hpp"
#include "wsnsec/core/simulator.hpp"
#include "wsnsec/harness/scenario.hpp"

namespace wsnsec::harness {

/// One CSV row. Column order is fixed by csv_columns().
struct MetricsReport {
    std::string scenario;
    std::string protocol;
    std::uint64_t seed = 0;
    std::string axis;
    std::string axis_value;

    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    double delivery_ratio = 1.0;  // unique uids; 1 when nothing was generated
    std::uint64_t adversary_dropped = 0;
    std::uint64_t channel_dropped = 0;
    std::uint64_t ttl_expired = 0;
    std::uint64_t no_route = 0;
    std::uint64_t pending = 0;  // still in flight (or buffered) at the end

    std::uint64_t control_packets = 0;
    std::uint64_t data_transmissions = 0;
    std::uint64_t total_transmissions = 0;
    std::uint64_t energy_total = 0;
    std::uint64_t energy_transmit = 0;
    std::uint64_t energy_receive = 0;
    std::uint64_t energy_compute = 0;

    std::uint64_t detections = 0;
    std::uint64_t true_positives = 0;
    std::uint64_t false_positives = 0;
    /// Mean ticks from an adversary's first drop to its first detection.
    std::optional<double> detection_latency;

    std::uint64_t promotions = 0;
    std::uint64_t reroutes = 0;
    std::uint64_t claims = 0;
    std::uint64_t blacklist_size = 0;  // summed over nodes
    std::uint64_t frq_trusted = 0;
    std::uint64_t frq_flagged = 0;
    std::uint64_t frq_inconclusive = 0;
    /// Flagged share of neighbor statuses in cooperative rounds whose suspect
    /// really is compromised.
    std::optional<double> flag_rate;

    std::uint64_t adversary_drops = 0;  // every DropData action, probes included
    std::uint64_t forgeries = 0;        // forged replies, FRq answers and gradients

    std::uint64_t mutesla_released = 0;
    std::uint64_t mutesla_rejected_unsafe = 0;
    std::uint64_t mutesla_forged_accepted = 0;
    std::uint64_t snep_accepted = 0;
    std::uint64_t snep_rejected = 0;
    std::uint64_t merkle_verified = 0;
    std::uint64_t merkle_rejected = 0;

    /// Every generated uid has exactly one fate.
    bool conserved() const noexcept {
        return generated == delivered + adversary_dropped + channel_dropped + ttl_expired + no_route + pending;
    }
};

const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_row(const MetricsReport& m);
std::string to_csv(const std::vector<MetricsReport>& rows);

struct NodeReport {
    NodeId node;
    std::optional<adversary::AdversaryKind> adversary;
    std::uint64_t transmissions = 0;
    EnergyBreakdown energy;
    std::uint64_t blacklisted_by = 0;  // nodes that hold it in their blacklist
};

struct RunOptions {
    bool trace = false;
    std::string axis;
    std::string axis_value;
    /// Called once all agents are attached, before the first event runs.
    std::function<void(Simulator&)> instrument;
};

struct RunResult {
    MetricsReport metrics;
    std::string trace;
    std::vector<DetectionEvent> detections;
    std::vector<bool> detection_correct;  // parallel to detections
    std::vector<NodeReport> nodes;
    DataLedger ledger;  // per-uid fates
};

RunResult run(const Scenario& scenario, const RunOptions& options = {});

/// `tick,mechanism,initiator,suspect,flagged,round_id,true_positive`
std::string detections_csv(const RunResult& result);
/// `node,adversary,transmissions,energy_transmit,energy_receive,energy_compute,energy_total,blacklisted_by`
std::string nodes_csv(const RunResult& result);

struct SweepSpec {
    /// Dotted JSON path of a numeric field, or `protocol`.
    std::string axis;
    std::vector<std::string> values;
    unsigned jobs = 1;
    bool trace = false;
};

/// One run per value with seed = base seed + index; results in input order.
std::vector<RunResult> sweep(const nlohmann::json& base, const SweepSpec& spec);

/// Splits a comma-separated value list, trimming blanks.
std::vector<std::string> parse_values(std::string_view list);

}  // namespace wsnsec::harness
