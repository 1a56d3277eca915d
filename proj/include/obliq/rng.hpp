#pragma once
// Counter-based generator: splitmix64 over (seed, index). Every consumer
// derives its draws from an explicit index, so parallel batches reproduce
// bit-for-bit regardless of scheduling.

#include <cstdint>

namespace obliq {

inline constexpr const char* kRngName = "splitmix64";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t rng_at(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed + index * 0x9E3779B97F4A7C15ULL);
}

// Uniform double in [0, 1).
inline double rng_u01(std::uint64_t seed, std::uint64_t index) {
    return static_cast<double>(rng_at(seed, index) >> 11) * 0x1.0p-53;
}

}  // namespace obliq
