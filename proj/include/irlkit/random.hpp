#pragma once

// Seeded random streams with platform-independent output.
//
// std::*_distribution are implementation-defined, so every draw here is
// derived directly from mt19937_64 bits.

#include <cmath>
#include <cstdint>
#include <random>

namespace irl {

/// SplitMix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for substream `index` of `seed`. Trials use (seed, trial index).
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return mix_seed(mix_seed(seed) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform on (0, 1].
    double uniform_open() { return 1.0 - uniform(); }

    /// Uniform integer on [0, n).
    std::uint64_t index(std::uint64_t n) {
        // Lemire-style rejection keeps the draw exactly uniform.
        const std::uint64_t limit = (~std::uint64_t(0)) - (~std::uint64_t(0)) % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard exponential variate.
    double exponential() { return -std::log(uniform_open()); }

    /// exp of a uniform draw on [log lo, log hi].
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace irl
