#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fewnet {

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Child seed for (label, index) under a parent seed. Randomness in the library
/// flows only through this function, so results never depend on scheduling.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view label,
                                                  std::uint64_t index = 0) noexcept {
    return splitmix64(splitmix64(parent ^ fnv1a64(label)) + index);
}

/// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
[[nodiscard]] inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace fewnet
