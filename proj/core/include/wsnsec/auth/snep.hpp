#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "wsnsec/core/types.hpp"
#include "wsnsec/crypto/primitives.hpp"

namespace wsnsec::auth {

using crypto::Key;
using crypto::Tag;

/// One endpoint of a pairwise SNEP session. Counters are 32-bit and never
/// decrease.
struct SnepSession {
    NodeId self;
    NodeId peer;
    Key k_encr;
    Key k_mac;
    Key k_rand;  // derived for completeness; no procedure consumes it
    std::uint32_t send_counter = 0;
    std::uint32_t recv_counter = 0;
    std::uint32_t window = 4;
};

inline constexpr std::uint32_t kDefaultResyncWindow = 4;

SnepSession make_session(NodeId self, NodeId peer, const Key& master, std::uint32_t window = kDefaultResyncWindow,
                         std::uint32_t initial_counter = 0);

/// Encrypted data plus tag. The counter is not carried.
struct SnepMessage {
    Bytes ciphertext;
    Tag tag;

    /// Wire layout: tag (16 bytes) || ciphertext.
    Bytes encode() const;
    /// Returns nullopt if the buffer is shorter than a tag.
    static std::optional<SnepMessage> decode(std::span<const std::uint8_t> wire);
};

SnepMessage snep_send(SnepSession& session, std::span<const std::uint8_t> data);

enum class SnepStatus { Accepted, RejectAuth, RejectReplay };

struct SnepReceive {
    SnepStatus status = SnepStatus::RejectAuth;
    Bytes data;
    std::uint32_t counter = 0;  // counter the message matched, when accepted

    bool accepted() const noexcept { return status == SnepStatus::Accepted; }
};

/// Scans counters recv_counter .. recv_counter+W-1 for a matching tag.
/// On the wire every failure is RejectAuth.
SnepReceive snep_receive(SnepSession& session, const SnepMessage& msg);

/// Same as snep_receive, but a failure is reported as RejectReplay when the
/// simulator knows the message was produced under a counter the receiver
/// has already consumed.
SnepReceive snep_receive(SnepSession& session, const SnepMessage& msg, std::uint32_t true_counter);

// Counter resynchronization: nonce challenge -> counter report || mac ->
// confirm || mac.

struct ResyncRequest {
    std::uint64_t nonce = 0;
};

struct ResyncReport {
    std::uint64_t nonce = 0;
    std::uint32_t send_counter = 0;
    std::uint32_t recv_counter = 0;
    Tag tag;
};

struct ResyncConfirm {
    std::uint64_t nonce = 0;
    std::uint32_t send_counter = 0;
    std::uint32_t recv_counter = 0;
    Tag tag;
};

ResyncReport make_resync_report(const SnepSession& responder, const ResyncRequest& request);
bool verify_resync_report(const SnepSession& initiator, const ResyncRequest& request, const ResyncReport& report);
ResyncConfirm make_resync_confirm(const SnepSession& initiator, std::uint64_t nonce);
bool verify_resync_confirm(const SnepSession& responder, std::uint64_t expected_nonce, const ResyncConfirm& confirm);

/// Hooks to observe or alter each of the three resync messages in flight.
struct ResyncChannel {
    std::function<void(ResyncRequest&)> request;
    std::function<void(ResyncReport&)> report;
    std::function<void(ResyncConfirm&)> confirm;
};

/// Runs the three-message exchange between `initiator` and `responder`.
/// Counters are committed on both sides only when every MAC checks; any
/// failure leaves both sessions unchanged and returns false.
bool counter_resync(SnepSession& initiator, SnepSession& responder, std::uint64_t nonce,
                    const ResyncChannel& channel = {});

}  // namespace wsnsec::auth
