#include "wsnsec/core/detection.hpp"

namespace wsnsec {

std::string_view to_string(DetectionMechanism m) noexcept {
    switch (m) {
        case DetectionMechanism::Dri: return "dri";
        case DetectionMechanism::FrqFrp: return "frq_frp";
        case DetectionMechanism::Nms: return "nms";
    }
    return "unknown";
}

}  // namespace wsnsec
