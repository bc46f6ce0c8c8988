#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "wsnsec/core/types.hpp"

namespace wsnsec::crypto {

template <std::size_t N, typename Tagged>
struct FixedBytes {
    static constexpr std::size_t size = N;
    std::array<std::uint8_t, N> bytes{};

    auto operator<=>(const FixedBytes&) const = default;
    std::span<const std::uint8_t> view() const noexcept { return bytes; }
};

/// SHA-256 output. Serves as both the Merkle hash and the one-way function.
using Digest = FixedBytes<32, struct DigestTag>;
using Key = FixedBytes<16, struct KeyTag>;
/// MAC output truncated to 16 bytes.
using Tag = FixedBytes<16, struct TagTag>;

Digest hash(std::span<const std::uint8_t> input);
Digest hash(std::string_view input);

/// One-way chain function: first 16 bytes of hash(k).
Key chain_step(const Key& k);
/// Applies chain_step `steps` times.
Key chain_fold(Key k, std::uint64_t steps);

/// HMAC-SHA256 truncated to 16 bytes.
Tag mac(const Key& key, std::span<const std::uint8_t> msg);
/// Constant-time comparison of mac(key, msg) against `tag`.
bool mac_verify(const Key& key, std::span<const std::uint8_t> msg, const Tag& tag);

/// First 16 bytes of hash(master || label).
Key derive_key(const Key& master, std::string_view label);

/// Counter-mode stream cipher: the keystream is hash(key || be64(counter) ||
/// be32(block)) for successive blocks. Length-preserving; decrypt is the
/// same XOR.
Bytes ctr_encrypt(const Key& key, std::uint64_t counter, std::span<const std::uint8_t> plaintext);
Bytes ctr_decrypt(const Key& key, std::uint64_t counter, std::span<const std::uint8_t> ciphertext);

bool constant_time_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept;

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

template <typename Fixed>
Fixed fixed_from_hex(std::string_view hex) {
    const Bytes raw = from_hex(hex);
    if (raw.size() != Fixed::size) {
        throw std::invalid_argument("expected " + std::to_string(Fixed::size) + " bytes of hex, got " +
                                    std::to_string(raw.size()));
    }
    Fixed out;
    std::copy(raw.begin(), raw.end(), out.bytes.begin());
    return out;
}

template <std::size_t N, typename T>
std::string to_hex(const FixedBytes<N, T>& value) {
    return to_hex(value.view());
}

/// Key taken from the leading bytes of a digest.
Key truncate_key(const Digest& d) noexcept;

void append_be32(Bytes& out, std::uint32_t v);
void append_be64(Bytes& out, std::uint64_t v);

}  // namespace wsnsec::crypto
