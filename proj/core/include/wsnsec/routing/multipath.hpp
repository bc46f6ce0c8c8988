#pragma once

#include <vector>

#include "wsnsec/adversary/adversary.hpp"
#include "wsnsec/core/simulator.hpp"

namespace wsnsec::routing {

/// Up to `k` node-disjoint paths from `source` to `base` whose hop count to
/// the base strictly decreases at every step. Computed as unit-capacity
/// max-flow with split nodes; shorter augmenting paths are found first.
std::vector<std::vector<NodeId>> disjoint_gradient_paths(const Topology& topology, NodeId source, NodeId base,
                                                         std::size_t k = 2);

struct MultipathConfig {
    NodeId base_station{0};
    std::size_t paths = 2;
    Tick hello_at = 0;
    Tick beacon_at = 6;
};

/// Redundant baseline: every data packet is sent once along each disjoint
/// path. Runs the same hello and gradient-beacon bootstrap as the monitored
/// protocol so energy comparisons include equivalent setup traffic.
class MultipathAgent : public Protocol {
public:
    MultipathAgent(Simulator& sim, NodeId self, MultipathConfig config, adversary::Adversary* adversary);

    void start() override;
    void on_receive(const Delivery& d) override;

    std::uint64_t send_data(Bytes payload);
    const std::vector<std::vector<NodeId>>& paths() const noexcept { return paths_; }

private:
    Simulator& sim_;
    NodeId self_;
    MultipathConfig config_;
    adversary::Adversary* adversary_;
    std::vector<std::vector<NodeId>> paths_;
    bool beacon_sent_ = false;
};

}  // namespace wsnsec::routing
