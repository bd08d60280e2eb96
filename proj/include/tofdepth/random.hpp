#pragma once

#include <cstdint>
#include <limits>

namespace tofdepth {

/// SplitMix64 (Steele, Lea, Flood 2014). Used instead of <random>
/// distributions, whose output differs between standard libraries.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound) by rejection; bound must be > 0.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Independent stream for (seed, index), e.g. one per RANSAC hypothesis.
    [[nodiscard]] static constexpr SplitMix64 stream(std::uint64_t seed, std::uint64_t index) noexcept {
        SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
        return SplitMix64(mix.next());
    }

private:
    std::uint64_t state_;
};

}  // namespace tofdepth
