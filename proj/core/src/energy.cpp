#include "wsnsec/core/energy.hpp"

#include <stdexcept>
#include <string>

namespace wsnsec {

EnergyMeter::EnergyMeter(std::size_t node_count, EnergyCosts costs) : costs_(costs), meters_(node_count) {}

EnergyBreakdown& EnergyMeter::at(NodeId node) {
    if (node.value >= meters_.size()) throw std::out_of_range("energy charge for unknown node " + std::to_string(node.value));
    return meters_[node.value];
}

void EnergyMeter::charge(NodeId node, Transmit t) {
    const auto units = t.bits * costs_.tx_per_bit;
    at(node).transmit += units;
    issued_ += units;
}

void EnergyMeter::charge(NodeId node, Receive r) {
    const auto units = r.bits * costs_.rx_per_bit;
    at(node).receive += units;
    issued_ += units;
}

void EnergyMeter::charge(NodeId node, Compute c) {
    const auto units = c.instructions * costs_.per_instruction;
    at(node).compute += units;
    issued_ += units;
}

const EnergyBreakdown& EnergyMeter::node(NodeId node) const {
    if (node.value >= meters_.size()) throw std::out_of_range("unknown node " + std::to_string(node.value));
    return meters_[node.value];
}

EnergyBreakdown EnergyMeter::totals() const {
    EnergyBreakdown sum;
    for (const auto& m : meters_) {
        sum.transmit += m.transmit;
        sum.receive += m.receive;
        sum.compute += m.compute;
    }
    return sum;
}

}  // namespace wsnsec
