#include "wsnsec/core/event_queue.hpp"

#include <stdexcept>
#include <string>

namespace wsnsec {

std::optional<Tick> EventQueue::next_time() const {
    if (heap_.empty()) return std::nullopt;
    return heap_.top().fire_time;
}

std::uint64_t EventQueue::schedule(Tick fire_time, std::variant<Delivery, TimerFire> action) {
    if (fire_time < now_) {
        throw std::logic_error("cannot schedule at tick " + std::to_string(fire_time) + " before now " +
                               std::to_string(now_));
    }
    const auto seq = next_sequence_++;
    heap_.push(SimEvent{fire_time, seq, std::move(action)});
    return seq;
}

std::optional<SimEvent> EventQueue::advance() {
    if (heap_.empty()) return std::nullopt;
    // priority_queue::top is const; the copy is cheap next to dispatch cost.
    SimEvent ev = heap_.top();
    heap_.pop();
    now_ = ev.fire_time;
    return ev;
}

}  // namespace wsnsec
