#pragma once

// Deterministic randomness helpers.  All sampling goes through these so that
// results are identical across platforms and standard libraries.

#include <cstdint>
#include <random>

namespace fcomp {

// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and up to two indices.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = splitmix64(seed ^ 0x7fc0a1c3e5f90d2bULL);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return h;
}

// Uniform double in (0, 1]; 53 significant bits, never exactly 0.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// Unbiased uniform draw from {0, ..., n-1} via rejection.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

// Compensated accumulator for long sums of small probabilities.
struct Kahan {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

} // namespace fcomp
