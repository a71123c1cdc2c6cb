#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace onsetml {

/// Deterministic 64-bit generator (SplitMix64). Output depends only on the
/// seed and the call count, so every result in the toolkit is reproducible
/// from a single integer. Statistical quality is more than enough for the
/// tiny sample sizes handled here.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound), bias-free via rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate (Box-Muller, no cached spare so the stream
    /// position stays a simple function of the call count).
    double next_gaussian() {
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

/// Independent child seed for sub-task `index` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 g(master ^ 0x5851f42d4c957f2dULL);
    std::uint64_t s = 0;
    for (std::uint64_t i = 0; i <= index; ++i) s = g.next();
    return s;
}

/// Fisher-Yates permutation of 0..n-1, deterministic per (n, seed).
inline std::vector<std::size_t> seeded_shuffle(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    SplitMix64 g(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(g.next_below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

}  // namespace onsetml
