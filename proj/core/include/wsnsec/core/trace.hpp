#pragma once

#include <string>
#include <string_view>

#include "wsnsec/core/packet.hpp"

namespace wsnsec {

/// Line-oriented event trace: `tick kind src dst uid note`.
class Trace {
public:
    explicit Trace(bool enabled = false) : enabled_(enabled) {}

    bool enabled() const noexcept { return enabled_; }
    void record(Tick tick, const Packet& packet, std::string_view note);
    void record(Tick tick, std::string_view kind, NodeId src, NodeId dst, std::uint64_t uid, std::string_view note);

    const std::string& text() const noexcept { return text_; }
    std::size_t lines() const noexcept { return lines_; }

private:
    bool enabled_;
    std::string text_;
    std::size_t lines_ = 0;
};

}  // namespace wsnsec
