#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace hsf {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-style seed derivation: the child seed depends only on the parent
/// seed and the path of tags, never on how many draws happened elsewhere.
/// Task results are therefore independent of scheduling order.
class SeedPath {
public:
    constexpr explicit SeedPath(std::uint64_t root) : state_(mix64(root)) {}

    constexpr SeedPath child(std::string_view tag) const { return SeedPath(state_, hash_tag(tag)); }
    constexpr SeedPath child(std::uint64_t index) const { return SeedPath(state_, mix64(index ^ 0x5851f42d4c957f2dULL)); }

    constexpr std::uint64_t value() const { return state_; }

    std::mt19937_64 engine() const { return std::mt19937_64(state_); }

private:
    constexpr SeedPath(std::uint64_t parent, std::uint64_t salt) : state_(mix64(parent ^ mix64(salt))) {}
    std::uint64_t state_;
};

/// Uniform integer in [0, n) without the implementation-defined behaviour of
/// std::uniform_int_distribution, so streams are identical across standard
/// libraries.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return static_cast<std::size_t>(r % n);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal via Box-Muller; portable unlike std::normal_distribution.
inline double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <class It>
void shuffle(It first, It last, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(first[i - 1], first[uniform_index(rng, i)]);
    }
}

} // namespace hsf
