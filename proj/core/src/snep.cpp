#include "wsnsec/auth/snep.hpp"

#include <algorithm>
#include <stdexcept>

namespace wsnsec::auth {

using crypto::append_be32;
using crypto::append_be64;

SnepSession make_session(NodeId self, NodeId peer, const Key& master, std::uint32_t window,
                         std::uint32_t initial_counter) {
    if (window == 0) throw std::invalid_argument("SNEP window must be at least 1");
    SnepSession s;
    s.self = self;
    s.peer = peer;
    s.k_encr = crypto::derive_key(master, "encr");
    s.k_mac = crypto::derive_key(master, "mac");
    s.k_rand = crypto::derive_key(master, "rand");
    s.send_counter = initial_counter;
    s.recv_counter = initial_counter;
    s.window = window;
    return s;
}

Bytes SnepMessage::encode() const {
    Bytes out(tag.bytes.begin(), tag.bytes.end());
    out.insert(out.end(), ciphertext.begin(), ciphertext.end());
    return out;
}

std::optional<SnepMessage> SnepMessage::decode(std::span<const std::uint8_t> wire) {
    if (wire.size() < Tag::size) return std::nullopt;
    SnepMessage m;
    std::copy_n(wire.begin(), Tag::size, m.tag.bytes.begin());
    m.ciphertext.assign(wire.begin() + Tag::size, wire.end());
    return m;
}

namespace {

Bytes mac_input(std::uint32_t counter, std::span<const std::uint8_t> ciphertext) {
    Bytes in;
    in.reserve(4 + ciphertext.size());
    append_be32(in, counter);
    in.insert(in.end(), ciphertext.begin(), ciphertext.end());
    return in;
}

}  // namespace

SnepMessage snep_send(SnepSession& session, std::span<const std::uint8_t> data) {
    SnepMessage m;
    m.ciphertext = crypto::ctr_encrypt(session.k_encr, session.send_counter, data);
    m.tag = crypto::mac(session.k_mac, mac_input(session.send_counter, m.ciphertext));
    ++session.send_counter;
    return m;
}

SnepReceive snep_receive(SnepSession& session, const SnepMessage& msg) {
    SnepReceive r;
    for (std::uint32_t i = 0; i < session.window; ++i) {
        const std::uint32_t c = session.recv_counter + i;
        if (c < session.recv_counter) break;  // 32-bit wrap
        if (crypto::mac_verify(session.k_mac, mac_input(c, msg.ciphertext), msg.tag)) {
            r.status = SnepStatus::Accepted;
            r.counter = c;
            r.data = crypto::ctr_decrypt(session.k_encr, c, msg.ciphertext);
            session.recv_counter = c + 1;
            return r;
        }
    }
    return r;
}

SnepReceive snep_receive(SnepSession& session, const SnepMessage& msg, std::uint32_t true_counter) {
    const auto before = session.recv_counter;
    SnepReceive r = snep_receive(session, msg);
    if (!r.accepted() && true_counter < before) r.status = SnepStatus::RejectReplay;
    return r;
}

namespace {

Bytes resync_input(std::string_view label, std::uint64_t nonce, std::uint32_t send, std::uint32_t recv) {
    Bytes in(label.begin(), label.end());
    append_be64(in, nonce);
    append_be32(in, send);
    append_be32(in, recv);
    return in;
}

}  // namespace

ResyncReport make_resync_report(const SnepSession& responder, const ResyncRequest& request) {
    ResyncReport r{request.nonce, responder.send_counter, responder.recv_counter, {}};
    r.tag = crypto::mac(responder.k_mac, resync_input("resync-report", r.nonce, r.send_counter, r.recv_counter));
    return r;
}

bool verify_resync_report(const SnepSession& initiator, const ResyncRequest& request, const ResyncReport& report) {
    if (report.nonce != request.nonce) return false;
    return crypto::mac_verify(initiator.k_mac,
                              resync_input("resync-report", report.nonce, report.send_counter, report.recv_counter),
                              report.tag);
}

ResyncConfirm make_resync_confirm(const SnepSession& initiator, std::uint64_t nonce) {
    ResyncConfirm c{nonce, initiator.send_counter, initiator.recv_counter, {}};
    c.tag = crypto::mac(initiator.k_mac, resync_input("resync-confirm", c.nonce, c.send_counter, c.recv_counter));
    return c;
}

bool verify_resync_confirm(const SnepSession& responder, std::uint64_t expected_nonce, const ResyncConfirm& confirm) {
    if (confirm.nonce != expected_nonce) return false;
    return crypto::mac_verify(
        responder.k_mac, resync_input("resync-confirm", confirm.nonce, confirm.send_counter, confirm.recv_counter),
        confirm.tag);
}

bool counter_resync(SnepSession& initiator, SnepSession& responder, std::uint64_t nonce,
                    const ResyncChannel& channel) {
    ResyncRequest request{nonce};
    ResyncRequest sent = request;
    if (channel.request) channel.request(sent);
    // The responder answers whatever nonce arrived; the initiator checks it
    // against the one it drew.
    ResyncReport report = make_resync_report(responder, sent);
    if (channel.report) channel.report(report);
    if (!verify_resync_report(initiator, request, report)) return false;

    // Counters never decrease, so each side only moves forward.
    const std::uint32_t initiator_recv = std::max(initiator.recv_counter, report.send_counter);
    const std::uint32_t initiator_send = std::max(initiator.send_counter, report.recv_counter);

    SnepSession staged = initiator;
    staged.recv_counter = initiator_recv;
    staged.send_counter = initiator_send;
    ResyncConfirm confirm = make_resync_confirm(staged, sent.nonce);
    if (channel.confirm) channel.confirm(confirm);
    if (!verify_resync_confirm(responder, sent.nonce, confirm)) return false;

    initiator.recv_counter = initiator_recv;
    initiator.send_counter = initiator_send;
    responder.recv_counter = std::max(responder.recv_counter, confirm.send_counter);
    responder.send_counter = std::max(responder.send_counter, confirm.recv_counter);
    return true;
}

}  // namespace wsnsec::auth
