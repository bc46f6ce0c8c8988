#pragma once

#include <cstdint>
#include <vector>

#include "wsnsec/core/types.hpp"

namespace wsnsec {

/// Per-bit and per-instruction costs in instruction-equivalent units.
/// A transmitted bit costs as much as ~800-1000 executed instructions; the
/// upper end is the default. The receive cost is an invented default.
struct EnergyCosts {
    std::uint64_t tx_per_bit = 1000;
    std::uint64_t rx_per_bit = 500;
    std::uint64_t per_instruction = 1;
};

struct Transmit { std::uint64_t bits; };
struct Receive { std::uint64_t bits; };
struct Compute { std::uint64_t instructions; };

struct EnergyBreakdown {
    std::uint64_t transmit = 0;
    std::uint64_t receive = 0;
    std::uint64_t compute = 0;
    std::uint64_t total() const noexcept { return transmit + receive + compute; }
};

class EnergyMeter {
public:
    explicit EnergyMeter(std::size_t node_count, EnergyCosts costs = {});

    void charge(NodeId node, Transmit t);
    void charge(NodeId node, Receive r);
    void charge(NodeId node, Compute c);

    const EnergyBreakdown& node(NodeId node) const;
    EnergyBreakdown totals() const;
    /// Running sum of every charge issued, independent of the per-node meters.
    std::uint64_t issued() const noexcept { return issued_; }
    const EnergyCosts& costs() const noexcept { return costs_; }
    std::size_t size() const noexcept { return meters_.size(); }

private:
    EnergyBreakdown& at(NodeId node);

    EnergyCosts costs_;
    std::vector<EnergyBreakdown> meters_;
    std::uint64_t issued_ = 0;
};

}  // namespace wsnsec
