#pragma once

#include <cstdint>
#include <random>

namespace sugar {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream seed for (master, tag, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ tag) + index);
}

namespace stream {
inline constexpr std::uint64_t texture = 0x7465787475726531ULL;
inline constexpr std::uint64_t probe = 0x70726f6265303031ULL;
inline constexpr std::uint64_t kmeans = 0x6b6d65616e733031ULL;
inline constexpr std::uint64_t covariance = 0x636f766172303031ULL;
inline constexpr std::uint64_t noise = 0x6e6f697365303031ULL;
}  // namespace stream

using Rng = std::mt19937_64;

}  // namespace sugar
