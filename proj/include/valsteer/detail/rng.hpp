#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace valsteer::detail {

/// FNV-1a. Stable across platforms, unlike std::hash.
inline std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
    return splitmix(seed ^ stable_hash(tag));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, std::string_view tag2) {
    return splitmix(splitmix(seed ^ stable_hash(tag)) ^ stable_hash(tag2));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, std::string_view tag2,
                              std::uint64_t extra) {
    return splitmix(mix_seed(seed, tag, tag2) ^ splitmix(extra));
}

// The std distributions have unspecified algorithms; index draws and shuffles
// below are pinned so serialized splits are portable, not just rerun-stable.

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    // rejection sampling on the top of the range to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

template <typename T>
void shuffle(std::vector<T>& xs, std::mt19937_64& rng) {
    for (std::size_t i = xs.size(); i > 1; --i) {
        std::swap(xs[i - 1], xs[uniform_index(rng, i)]);
    }
}

/// First k elements of a seeded Fisher-Yates pass; order of the sample is the
/// draw order, callers sort if they need canonical output.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k, std::mt19937_64& rng) {
    if (k > pool.size()) k = pool.size();
    std::vector<T> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_index(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace valsteer::detail
