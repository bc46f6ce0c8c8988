#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <variant>
#include <vector>

#include "wsnsec/core/packet.hpp"
#include "wsnsec/core/types.hpp"

namespace wsnsec {

struct Delivery {
    Packet packet;
    NodeId receiver;
    NodeId transmitter;
};

struct TimerFire {
    NodeId node;
    std::uint64_t token = 0;
};

struct SimEvent {
    Tick fire_time = 0;
    std::uint64_t sequence = 0;  // assigned by the queue
    std::variant<Delivery, TimerFire> action;
};

/// Min-queue ordered by (fire_time, sequence). Sequence numbers are handed
/// out at scheduling time, so same-tick events fire in scheduling order.
class EventQueue {
public:
    Tick now() const noexcept { return now_; }
    bool empty() const noexcept { return heap_.empty(); }
    std::size_t size() const noexcept { return heap_.size(); }
    std::optional<Tick> next_time() const;

    /// Throws std::logic_error when `fire_time` lies before now().
    std::uint64_t schedule(Tick fire_time, std::variant<Delivery, TimerFire> action);

    /// Pops the earliest event and advances virtual time to it.
    std::optional<SimEvent> advance();

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const noexcept {
            if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
    Tick now_ = 0;
    std::uint64_t next_sequence_ = 0;
};

}  // namespace wsnsec
