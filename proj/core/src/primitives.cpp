#include "wsnsec/crypto/primitives.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>
#include <stdexcept>

namespace wsnsec::crypto {

Digest hash(std::span<const std::uint8_t> input) {
    Digest out;
    unsigned int len = 0;
    if (EVP_Digest(input.data(), input.size(), out.bytes.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32) {
        throw std::runtime_error("SHA-256 failed");
    }
    return out;
}

Digest hash(std::string_view input) {
    return hash(std::span(reinterpret_cast<const std::uint8_t*>(input.data()), input.size()));
}

Key truncate_key(const Digest& d) noexcept {
    Key k;
    std::copy_n(d.bytes.begin(), Key::size, k.bytes.begin());
    return k;
}

Key chain_step(const Key& k) { return truncate_key(hash(k.view())); }

Key chain_fold(Key k, std::uint64_t steps) {
    for (std::uint64_t i = 0; i < steps; ++i) k = chain_step(k);
    return k;
}

Tag mac(const Key& key, std::span<const std::uint8_t> msg) {
    std::array<std::uint8_t, EVP_MAX_MD_SIZE> full{};
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.bytes.data(), static_cast<int>(key.bytes.size()), msg.data(), msg.size(), full.data(),
             &len) == nullptr) {
        throw std::runtime_error("HMAC-SHA256 failed");
    }
    Tag t;
    std::copy_n(full.begin(), Tag::size, t.bytes.begin());
    return t;
}

bool mac_verify(const Key& key, std::span<const std::uint8_t> msg, const Tag& tag) {
    const Tag expected = mac(key, msg);
    return constant_time_equal(expected.view(), tag.view());
}

Key derive_key(const Key& master, std::string_view label) {
    Bytes buf(master.bytes.begin(), master.bytes.end());
    buf.insert(buf.end(), label.begin(), label.end());
    return truncate_key(hash(buf));
}

void append_be32(Bytes& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void append_be64(Bytes& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

Bytes ctr_encrypt(const Key& key, std::uint64_t counter, std::span<const std::uint8_t> plaintext) {
    Bytes out(plaintext.begin(), plaintext.end());
    Bytes block_input(key.bytes.begin(), key.bytes.end());
    append_be64(block_input, counter);
    const std::size_t prefix = block_input.size();
    std::uint32_t block = 0;
    for (std::size_t off = 0; off < out.size(); off += Digest::size, ++block) {
        block_input.resize(prefix);
        append_be32(block_input, block);
        const Digest ks = hash(block_input);
        const std::size_t n = std::min(Digest::size, out.size() - off);
        for (std::size_t i = 0; i < n; ++i) out[off + i] ^= ks.bytes[i];
    }
    return out;
}

Bytes ctr_decrypt(const Key& key, std::uint64_t counter, std::span<const std::uint8_t> ciphertext) {
    return ctr_encrypt(key, counter, ciphertext);
}

bool constant_time_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept {
    if (a.size() != b.size()) return false;
    return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

namespace {

int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = nibble(hex[i]);
        const int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex character");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

}  // namespace wsnsec::crypto
