#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wsnsec {

/// SplitMix64 finalizer; used to derive independent seeds from one root.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of a named stream. Every stochastic consumer draws from its own
/// stream so enabling one feature never shifts another's draws.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a over the label
    for (char c : label) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return mix64(mix64(root ^ h) + index);
}

/// Seeded generator with distribution helpers whose output does not depend
/// on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi] (inclusive); hi >= lo.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_());
        // Rejection sampling removes modulo bias.
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return lo + static_cast<std::int64_t>(draw % span);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace wsnsec
