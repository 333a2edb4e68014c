#pragma once

#include <cstdint>

namespace axiseg {

// splitmix64 finalizer. Fully specified here so independent implementations
// of the noise model can reproduce identical streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Multiply-xor mix of (base seed, axis ordinal, slice index) into one stream
// seed. Distinct axes and slices get statistically independent streams.
constexpr std::uint64_t mix_seed(std::uint64_t base_seed,
                                 std::uint64_t axis_ordinal,
                                 std::uint64_t slice_index) {
    std::uint64_t h = splitmix64(base_seed ^ (axis_ordinal * 0x9e3779b97f4a7c15ULL));
    return splitmix64(h ^ (slice_index * 0xbf58476d1ce4e5b9ULL));
}

// Counter-mode splitmix64 stream.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit constexpr SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    constexpr std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform double in [0, 1) with 53-bit resolution.
    constexpr double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be > 0; modulo bias is negligible for
    // the small n used here (class counts).
    constexpr std::uint32_t next_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(next() % n);
    }
};

} // namespace axiseg
