#pragma once

#include <vector>

#include "wsnsec/core/rng.hpp"
#include "wsnsec/core/types.hpp"

namespace wsnsec {

/// Loosely synchronized clocks: each node reads global time plus a static
/// offset drawn once, uniform in [-epsilon, +epsilon].
class LooseClock {
public:
    LooseClock(std::size_t node_count, Tick epsilon, Rng& rng);
    LooseClock(std::vector<Tick> offsets, Tick epsilon);

    Tick epsilon() const noexcept { return epsilon_; }
    Tick offset(NodeId node) const;
    Tick local_time(NodeId node, Tick global_time) const { return global_time + offset(node); }

private:
    std::vector<Tick> offsets_;
    Tick epsilon_;
};

}  // namespace wsnsec
