// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rewod {

// Portable pseudo random source. The algorithms are fixed so that scenarios
// and training runs reproduce bit-for-bit in any language:
//   state seeding : SplitMix64 applied four times to the seed
//   generator     : xoshiro256** (Blackman & Vigna)
//   uniform()     : (next() >> 11) * 2^-53, in [0, 1)
//   normal()      : Box-Muller cosine branch, u1 = 1 - uniform(), no caching
//   index(n)      : floor(uniform() * n)
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    double uniform();
    double uniform(double lo, double hi);
    double normal();
    double normal(double mean, double sigma) { return mean + sigma * normal(); }
    std::size_t index(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }

    // Fisher-Yates from the back, using index().
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// Independent sub-stream seed for (seed, stream) pairs.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Uniform subsample of at most `count` values, returned in original order.
std::vector<double> subsample(std::span<const double> values, std::size_t count, std::uint64_t seed);

}  // namespace rewod
