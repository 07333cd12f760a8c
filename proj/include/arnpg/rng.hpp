#pragma once

#include <cstdint>

namespace arnpg {

/// SplitMix64 finalizer. Used both as the stream generator and as the
/// split function that derives independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives the seed of child stream `index` from `parent`.
/// split(p, i) = mix64(p ^ mix64(i + 0x9e3779b97f4a7c15)).
constexpr std::uint64_t split_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(parent ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// Portable 64-bit generator: SplitMix64 (Steele, Lea, Flood 2014).
/// State advances by the golden-ratio increment; output is mix64(state).
/// Doubles use the top 53 bits, so every platform produces identical
/// streams for identical seeds.
class Rng {
public:
    explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform double in [0, 1).
    constexpr double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Rejection sampling removes modulo bias.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    constexpr std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace arnpg
