#pragma once

// Seed derivation: every task gets its own generator seeded from
// splitmix64(base ^ splitmix64(stream + 1)), so results never depend on which
// worker runs which task.

#include <cstdint>
#include <random>

namespace robust_scatter {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 1));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t substream) {
    return derive_seed(derive_seed(base, stream), substream);
}

inline Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

}  // namespace robust_scatter
