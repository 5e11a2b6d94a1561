#pragma once

#include <cstdint>

namespace umc {

/// splitmix64 (Vigna's constants). Used instead of <random> engines and
/// distributions so that seeded runs are reproducible across standard
/// library implementations. All randomness in the project flows through
/// explicit seeds into this generator.
struct SplitMix64 {
    std::uint64_t state;

    explicit constexpr SplitMix64(std::uint64_t seed) : state(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Draw in [0, bound), bound >= 1. Multiply-shift; the O(2^-64) bias is
    /// irrelevant here and the result is platform-independent.
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    /// Draw in [lo, hi], inclusive.
    int range(int lo, int hi) {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Derive an independent stream, e.g. one per fuzz trial.
    static constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
        SplitMix64 g(seed ^ (0x632be59bd9b4e019ull + salt * 0x9e3779b97f4a7c15ull));
        return g.next();
    }
};

}  // namespace umc
