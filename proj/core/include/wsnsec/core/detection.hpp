#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsnsec/core/types.hpp"

namespace wsnsec {

enum class DetectionMechanism : std::uint8_t { Dri, FrqFrp, Nms };

std::string_view to_string(DetectionMechanism m) noexcept;

/// One node deciding that a neighbor misbehaves and blacklisting it.
struct DetectionEvent {
    Tick tick = 0;
    NodeId initiator;
    NodeId suspect;
    std::vector<NodeId> flagged;  // evidence: neighbors the suspect dropped for
    std::uint64_t round_id = 0;
    DetectionMechanism mechanism = DetectionMechanism::Dri;
};

class DetectionLog {
public:
    void record(DetectionEvent e) { events_.push_back(std::move(e)); }
    const std::vector<DetectionEvent>& events() const noexcept { return events_; }

private:
    std::vector<DetectionEvent> events_;
};

}  // namespace wsnsec
