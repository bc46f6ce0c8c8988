#include "wsnsec/core/trace.hpp"

#include <string>

namespace wsnsec {

void Trace::record(Tick tick, const Packet& packet, std::string_view note) {
    if (!enabled_) return;
    record(tick, to_string(packet.kind), packet.src, packet.dst, packet.uid, note);
}

void Trace::record(Tick tick, std::string_view kind, NodeId src, NodeId dst, std::uint64_t uid,
                   std::string_view note) {
    if (!enabled_) return;
    text_ += std::to_string(tick);
    text_ += ' ';
    text_ += kind;
    text_ += ' ';
    text_ += std::to_string(src.value);
    text_ += ' ';
    text_ += std::to_string(dst.value);
    text_ += ' ';
    text_ += std::to_string(uid);
    text_ += ' ';
    text_ += note.empty() ? std::string_view{"-"} : note;
    text_ += '\n';
    ++lines_;
}

}  // namespace wsnsec
