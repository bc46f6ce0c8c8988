#include "wsnsec/core/clock.hpp"

#include <cstdlib>
#include <stdexcept>

namespace wsnsec {

LooseClock::LooseClock(std::size_t node_count, Tick epsilon, Rng& rng) : epsilon_(epsilon) {
    if (epsilon < 0) throw std::invalid_argument("epsilon must be non-negative");
    offsets_.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) {
        offsets_.push_back(epsilon == 0 ? 0 : rng.uniform_int(-epsilon, epsilon));
    }
}

LooseClock::LooseClock(std::vector<Tick> offsets, Tick epsilon) : offsets_(std::move(offsets)), epsilon_(epsilon) {
    for (Tick o : offsets_) {
        if (std::llabs(o) > epsilon_) throw std::invalid_argument("clock offset exceeds epsilon");
    }
}

Tick LooseClock::offset(NodeId node) const {
    if (node.value >= offsets_.size()) throw std::out_of_range("unknown node in clock");
    return offsets_[node.value];
}

}  // namespace wsnsec
