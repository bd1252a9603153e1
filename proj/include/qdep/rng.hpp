#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qdep {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the substream addressed by (seed, keys...). Substreams depend only on
/// their address, so work can be scheduled in any order or on any worker.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(seed);
    for (auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    return Engine(substream_seed(seed, keys));
}

// Domain tags keep unrelated consumers of one master seed apart.
namespace stream {
inline constexpr std::uint64_t kBootstrap = 0x626f6f74;   // "boot"
inline constexpr std::uint64_t kTrial = 0x747269616c;     // "trial"
inline constexpr std::uint64_t kDifference = 0x64696666;  // "diff"
}  // namespace stream

}  // namespace qdep
