#pragma once

#include <cstdint>
#include <random>

namespace lomaq {

// splitmix64; used to derive independent, well-separated seeds for named streams.
inline uint64_t mix_seed(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic sub-stream: same (seed, stream) always yields the same engine.
inline std::mt19937_64 make_rng(uint64_t seed, uint64_t stream = 0) {
    return std::mt19937_64(mix_seed(mix_seed(seed) + stream));
}

} // namespace lomaq
