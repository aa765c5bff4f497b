// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cott {

// All randomness goes through these helpers rather than <random> distributions,
// whose output sequences are implementation-defined. Keeps every seeded run
// reproducible independent of the standard library.

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over seed+stream
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform_double(std::mt19937_64& rng) {
    // 53 random bits mapped to [0, 1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double normal_double(std::mt19937_64& rng) {
    // Box-Muller; one value per call, the second branch is discarded.
    double u1 = uniform_double(rng);
    double u2 = uniform_double(rng);
    while (u1 <= 0.0) u1 = uniform_double(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline std::size_t bounded_index(std::mt19937_64& rng, std::size_t n) {
    // rejection sampling for an unbiased draw in [0, n)
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t u = rng();
    while (u >= limit) u = rng();
    return static_cast<std::size_t>(u % bound);
}

template <typename T>
void shuffle_in_place(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = bounded_index(rng, i);
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace cott
