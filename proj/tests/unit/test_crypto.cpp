#include <doctest.h>

#include <functional>
#include <set>
#include <unordered_set>

#include "wsnsec/core/rng.hpp"
#include "wsnsec/crypto/primitives.hpp"

using namespace wsnsec;
using namespace wsnsec::crypto;

namespace {

Key random_key(Rng& rng) {
    Key k;
    for (auto& b : k.bytes) b = static_cast<std::uint8_t>(rng.next());
    return k;
}

Bytes random_bytes(Rng& rng, std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng.next());
    return out;
}

}  // namespace

TEST_CASE("hash is deterministic and fixed-size") {
    CHECK(hash("abc") == hash("abc"));
    CHECK(hash("").bytes.size() == 32);
    // FIPS 180-2 test vector for SHA-256("abc").
    CHECK(to_hex(hash("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("no digest collisions over 10^5 random inputs") {
    Rng rng(2024);
    std::set<Digest> seen;
    for (int i = 0; i < 100000; ++i) seen.insert(hash(random_bytes(rng, 1 + (i % 48))));
    // Inputs themselves may repeat for very short lengths; count distinct inputs too.
    Rng replay(2024);
    std::set<Bytes> inputs;
    for (int i = 0; i < 100000; ++i) inputs.insert(random_bytes(replay, 1 + (i % 48)));
    CHECK(seen.size() == inputs.size());
}

TEST_CASE("chain_step") {
    Rng rng(5);
    const Key k2 = random_key(rng);
    CHECK(chain_step(k2) == chain_step(k2));

    SUBCASE("K0 = F(F(K2))") {
        const Key k1 = chain_step(k2);
        const Key k0 = chain_step(k1);
        CHECK(chain_fold(k2, 2) == k0);
        // F is the first 16 bytes of the hash of the key.
        const Digest d = hash(k2.view());
        CHECK(std::equal(k1.bytes.begin(), k1.bytes.end(), d.bytes.begin()));
    }

    SUBCASE("100-fold iteration equals recursive composition") {
        std::function<Key(Key, int)> recurse = [&](Key k, int n) { return n == 0 ? k : recurse(chain_step(k), n - 1); };
        CHECK(chain_fold(k2, 100) == recurse(k2, 100));
    }
}

TEST_CASE("mac") {
    Rng rng(9);
    const Key key = random_key(rng);
    const Bytes msg = random_bytes(rng, 40);
    CHECK(mac(key, msg) == mac(key, msg));
    CHECK(mac_verify(key, msg, mac(key, msg)));

    SUBCASE("wrong key fails verification") {
        Key other = key;
        other.bytes[0] ^= 1;
        CHECK_FALSE(mac_verify(other, msg, mac(key, msg)));
    }

    SUBCASE("every single-bit payload flip changes the tag over 10^3 trials") {
        int differing = 0;
        for (int t = 0; t < 1000; ++t) {
            const Key k = random_key(rng);
            Bytes m = random_bytes(rng, 1 + t % 64);
            const Tag original = mac(k, m);
            const auto bit = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(m.size() * 8 - 1)));
            m[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
            if (mac(k, m) != original) ++differing;
        }
        CHECK(differing == 1000);
    }
}

TEST_CASE("derive_key") {
    Rng rng(13);
    const Key master = random_key(rng);
    CHECK(derive_key(master, "encr") != derive_key(master, "mac"));
    CHECK(derive_key(master, "rand") != derive_key(master, "mac"));
    CHECK(derive_key(master, "encr") == derive_key(master, "encr"));

    // Oracle: first 16 bytes of hash(master || label).
    Bytes pre(master.bytes.begin(), master.bytes.end());
    pre.insert(pre.end(), {'m', 'a', 'c'});
    CHECK(derive_key(master, "mac") == truncate_key(hash(pre)));

    std::set<Key> keys;
    for (int i = 0; i < 1000; ++i) keys.insert(derive_key(random_key(rng), "encr"));
    CHECK(keys.size() == 1000);
}

TEST_CASE("counter-mode cipher") {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const Key k = random_key(rng);
        const auto c = rng.next();
        const Bytes p = random_bytes(rng, static_cast<std::size_t>(rng.uniform_int(0, 130)));
        const Bytes ct = ctr_encrypt(k, c, p);
        CHECK(ct.size() == p.size());
        CHECK(ctr_decrypt(k, c, ct) == p);
    }
    const Key k = random_key(rng);
    const Bytes p(48, 0x5A);
    CHECK(ctr_encrypt(k, 7, p) != ctr_encrypt(k, 8, p));
    CHECK(ctr_encrypt(k, 7, Bytes{}).empty());

    SUBCASE("keystream is hash(key || be64(counter) || be32(block))") {
        Bytes block_in(k.bytes.begin(), k.bytes.end());
        append_be64(block_in, 7);
        append_be32(block_in, 1);
        const Digest ks1 = hash(block_in);
        const Bytes ct = ctr_encrypt(k, 7, p);
        for (std::size_t i = 32; i < 48; ++i) CHECK(ct[i] == (p[i] ^ ks1.bytes[i - 32]));
    }
}

TEST_CASE("hex helpers") {
    CHECK(to_hex(from_hex("00ff10")) == "00ff10");
    CHECK_THROWS_AS(from_hex("abc"), std::invalid_argument);
    CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);
    CHECK_THROWS_AS(fixed_from_hex<Key>("00"), std::invalid_argument);
}
