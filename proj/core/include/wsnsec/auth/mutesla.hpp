#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "wsnsec/core/packet.hpp"
#include "wsnsec/crypto/primitives.hpp"

namespace wsnsec::auth {

using crypto::Key;

/// Timing parameters shared by the sender and every receiver.
struct ChainParams {
    Tick interval_len = 10;
    Tick start_time = 0;
    std::uint32_t disclosure_lag = 2;

    /// floor((t - start_time) / interval_len); negative before the start.
    std::int64_t interval_of(Tick t) const noexcept;
    Tick interval_start(std::int64_t interval) const noexcept { return start_time + interval * interval_len; }
};

/// One-way key chain K_0..K_n with K_i = F(K_{i+1}); K_0 is the commitment.
class KeyChain {
public:
    const ChainParams& params() const noexcept { return params_; }
    std::uint32_t length() const noexcept { return static_cast<std::uint32_t>(keys_.size() - 1); }
    const Key& key(std::uint32_t index) const { return keys_.at(index); }
    const Key& commitment() const noexcept { return keys_.front(); }
    const std::vector<Key>& keys() const noexcept { return keys_; }

private:
    friend KeyChain generate_chain(const Key& seed, std::uint32_t n, ChainParams params);
    std::vector<Key> keys_;
    ChainParams params_;
};

/// K_n = seed and K_i = chain_step(K_{i+1}). Throws std::invalid_argument
/// for n == 0.
KeyChain generate_chain(const Key& seed, std::uint32_t n, ChainParams params = {});

/// Tags `payload` with the key of the interval containing `t`. The interval
/// index travels in Packet::counter. Throws std::out_of_range if `t` lies
/// before the chain start or past interval n.
Packet auth_broadcast(const KeyChain& chain, const Bytes& payload, Tick t, NodeId sender, std::uint64_t uid);

struct DisclosedKey {
    std::uint32_t interval_index = 0;
    Key key;
};

enum class AcceptResult { Buffered, RejectedUnsafe };

struct ReleaseResult {
    bool key_authentic = false;
    std::vector<Packet> released;
    std::size_t discarded = 0;
};

/// Receiver side: safety-condition buffering and disclosure verification.
class ReceiverAuthState {
public:
    static constexpr std::size_t kDefaultBufferCap = 256;

    ReceiverAuthState(const Key& commitment, ChainParams params, Tick epsilon,
                      std::size_t buffer_cap = kDefaultBufferCap);

    /// Buffers the packet iff the MAC key of `sender_interval` cannot have
    /// been disclosed yet: interval(local_t + epsilon) < sender_interval + lag.
    AcceptResult receiver_accept(const Packet& packet, std::uint32_t sender_interval, Tick local_t);

    /// Authenticates a disclosed key against the last authentic key and
    /// releases every buffered packet it (or a key derived from it) verifies.
    /// Inauthentic keys leave the state untouched.
    ReleaseResult receiver_verify_disclosure(const DisclosedKey& disclosed);

    std::uint32_t last_auth_index() const noexcept { return last_auth_index_; }
    const Key& last_auth_key() const noexcept { return last_auth_key_; }
    std::size_t pending() const noexcept { return pending_.size(); }
    std::size_t evicted() const noexcept { return evicted_; }
    Tick epsilon() const noexcept { return epsilon_; }
    const ChainParams& params() const noexcept { return params_; }

private:
    struct Pending {
        Packet packet;
        std::uint32_t interval;
    };

    ChainParams params_;
    Tick epsilon_;
    std::size_t cap_;
    std::uint32_t last_auth_index_ = 0;
    Key last_auth_key_;
    std::deque<Pending> pending_;
    std::size_t evicted_ = 0;
};

}  // namespace wsnsec::auth
