#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace prefrank {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace detail

/// Seed for the named substream `name` (optionally indexed, e.g. by step)
/// of a root seed. Streams with different names never share state, so adding
/// a new consumer does not perturb existing ones.
constexpr std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
    return detail::splitmix64(detail::splitmix64(root ^ detail::fnv1a(name)) + detail::splitmix64(index + 1));
}

inline Rng make_substream(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
    return Rng(substream_seed(root, name, index));
}

}  // namespace prefrank
