#include "wsnsec/auth/mutesla.hpp"

#include <stdexcept>
#include <string>

namespace wsnsec::auth {

std::int64_t ChainParams::interval_of(Tick t) const noexcept {
    const Tick rel = t - start_time;
    // floor division for negative offsets
    Tick q = rel / interval_len;
    if (rel % interval_len != 0 && rel < 0) --q;
    return q;
}

KeyChain generate_chain(const Key& seed, std::uint32_t n, ChainParams params) {
    if (n == 0) throw std::invalid_argument("key chain needs at least one usable interval (n >= 1)");
    if (params.interval_len <= 0) throw std::invalid_argument("interval_len must be positive");
    KeyChain chain;
    chain.params_ = params;
    chain.keys_.resize(static_cast<std::size_t>(n) + 1);
    chain.keys_[n] = seed;
    for (std::uint32_t i = n; i > 0; --i) chain.keys_[i - 1] = crypto::chain_step(chain.keys_[i]);
    return chain;
}

Packet auth_broadcast(const KeyChain& chain, const Bytes& payload, Tick t, NodeId sender, std::uint64_t uid) {
    const auto interval = chain.params().interval_of(t);
    if (interval < 0 || interval > static_cast<std::int64_t>(chain.length())) {
        throw std::out_of_range("tick " + std::to_string(t) + " lies outside the key chain lifetime");
    }
    Packet p;
    p.uid = uid;
    p.kind = PacketKind::AuthBroadcast;
    p.src = sender;
    p.dst = sender;
    p.payload = payload;
    p.counter = static_cast<std::uint64_t>(interval);
    p.tag = crypto::mac(chain.key(static_cast<std::uint32_t>(interval)), payload).bytes;
    return p;
}

ReceiverAuthState::ReceiverAuthState(const Key& commitment, ChainParams params, Tick epsilon,
                                     std::size_t buffer_cap)
    : params_(params), epsilon_(epsilon), cap_(buffer_cap), last_auth_key_(commitment) {
    if (cap_ == 0) throw std::invalid_argument("buffer cap must be positive");
}

AcceptResult ReceiverAuthState::receiver_accept(const Packet& packet, std::uint32_t sender_interval, Tick local_t) {
    const auto latest_sender_interval = params_.interval_of(local_t + epsilon_);
    const auto disclosure_interval = static_cast<std::int64_t>(sender_interval) + params_.disclosure_lag;
    if (latest_sender_interval >= disclosure_interval || sender_interval <= last_auth_index_) {
        return AcceptResult::RejectedUnsafe;
    }
    if (pending_.size() == cap_) {
        pending_.pop_front();
        ++evicted_;
    }
    pending_.push_back(Pending{packet, sender_interval});
    return AcceptResult::Buffered;
}

ReleaseResult ReceiverAuthState::receiver_verify_disclosure(const DisclosedKey& disclosed) {
    ReleaseResult result;
    if (disclosed.interval_index <= last_auth_index_) return result;

    const std::uint32_t gap = disclosed.interval_index - last_auth_index_;
    if (crypto::chain_fold(disclosed.key, gap) != last_auth_key_) return result;
    result.key_authentic = true;

    // Keys of every interval between the old anchor and the new one.
    std::vector<Key> interval_keys(gap + 1);
    interval_keys[gap] = disclosed.key;
    for (std::uint32_t j = gap; j > 0; --j) interval_keys[j - 1] = crypto::chain_step(interval_keys[j]);
    const std::uint32_t base = last_auth_index_;

    std::deque<Pending> still_pending;
    for (auto& entry : pending_) {
        if (entry.interval > disclosed.interval_index) {
            still_pending.push_back(std::move(entry));
            continue;
        }
        bool ok = false;
        if (entry.interval > base && entry.packet.tag) {
            crypto::Tag tag;
            tag.bytes = *entry.packet.tag;
            ok = crypto::mac_verify(interval_keys[entry.interval - base], entry.packet.payload, tag);
        }
        if (ok) {
            result.released.push_back(std::move(entry.packet));
        } else {
            ++result.discarded;
        }
    }
    pending_ = std::move(still_pending);
    last_auth_index_ = disclosed.interval_index;
    last_auth_key_ = disclosed.key;
    return result;
}

}  // namespace wsnsec::auth
