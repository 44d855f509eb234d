#pragma once

// Counter-based seed derivation. A stream seed is a pure function of the
// master seed and a sequence of labels, so scenario generation does not
// depend on evaluation order or thread assignment.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace mfrac::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a, used to turn text labels into split keys.
inline constexpr std::uint64_t label_key(std::string_view label) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline constexpr std::uint64_t split(std::uint64_t seed, std::uint64_t key) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(key + 0x632be59bd9b4e019ULL));
}

inline constexpr std::uint64_t split(std::uint64_t seed, std::string_view label) noexcept {
    return split(seed, label_key(label));
}

inline std::uint64_t split(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
    for (auto k : keys) seed = split(seed, k);
    return seed;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::string_view stream) {
    const std::uint64_t s = split(seed, stream);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return Engine(seq);
}

} // namespace mfrac::rng
