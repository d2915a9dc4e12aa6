#pragma once

// Seedable, splittable pseudo-random streams.
//
// Every random draw in the library comes from a SplitMix64 stream whose
// initial state is derived from a key tuple (seed, label, index). Two draws
// with different keys never share state, so work can be split across threads
// or reordered without changing any output.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace showwork::rng {

/// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// 64-bit FNV-1a, used to fold string labels into stream keys.
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    constexpr explicit SplitMix64(std::uint64_t state) noexcept : state_{state} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Unbiased integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept {
        // Lemire's multiply-shift with rejection of the biased low region.
        std::uint64_t x = (*this)();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = (*this)();
                m = static_cast<__uint128_t>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal draw (Box-Muller, one value per call).
    double normal() noexcept {
        // 1 - u keeps the logarithm argument in (0, 1].
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    constexpr std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

/// Stream for key (seed, index).
constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return SplitMix64{mix64(mix64(seed ^ 0x6A09E667F3BCC909ULL) ^ mix64(index + 0x3C6EF372FE94F82BULL))};
}

/// Stream for key (seed, label, index).
constexpr SplitMix64 substream(std::uint64_t seed, std::string_view label, std::uint64_t index) noexcept {
    const std::uint64_t base = mix64(seed ^ 0x6A09E667F3BCC909ULL) ^ mix64(hash_label(label));
    return SplitMix64{mix64(mix64(base) ^ mix64(index + 0x3C6EF372FE94F82BULL))};
}

}  // namespace showwork::rng
