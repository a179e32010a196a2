#pragma once

#include <cstdint>

namespace resopt::rng {

// SplitMix64 finalizer; full-avalanche mixing of a 64-bit word.
inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Purpose tags so one (seed, replication, user) tuple yields independent
// draws for each decision, no matter which of them a given run consumes.
enum class Channel : std::uint64_t {
    population = 0,  // sampling the user's type from a population spec
    state = 1,       // period-2 state A/B draw
    use = 2,         // final use/no-use draw
};

/// Counter-based uniform draw in [0, 1).  Stateless: the value depends only
/// on the key, so results are identical under any evaluation order or degree
/// of parallelism.
inline double unit_uniform(std::uint64_t seed, std::uint64_t replication, std::uint64_t user,
                           Channel channel) {
    std::uint64_t h = mix(seed ^ 0x243f6a8885a308d3ULL);
    h = mix(h ^ replication);
    h = mix(h ^ user);
    h = mix(h ^ static_cast<std::uint64_t>(channel));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace resopt::rng
