#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "unitlab/error.hpp"

namespace unitlab {

// splitmix64; used to scramble seeds and derive independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable 64-bit FNV-1a, for turning string keys (e.g. ABX cell keys) into
// per-cell seeds that do not depend on the standard library's std::hash.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives a child seed from a master seed and a list of salts. Children with
// distinct salt lists are independent streams; serial and parallel schedules
// that use the same salts agree.
inline std::uint64_t deriveSeed(std::uint64_t seed, std::initializer_list<std::uint64_t> salts) {
    std::uint64_t s = seed ^ 0x5851f42d4c957f2dULL;
    std::uint64_t out = splitmix64(s);
    for (std::uint64_t salt : salts) {
        s ^= splitmix64(s) + salt;
        out = splitmix64(s);
    }
    return out;
}

// Deterministic RNG wrapper. All draws go through explicit conversions from
// the mt19937_64 bit stream, so results are identical across platforms and
// standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        eng_.seed(splitmix64(s));
    }

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound), unbiased via rejection.
    std::uint64_t integer(std::uint64_t bound) {
        if (bound == 0) fail(ErrorKind::Domain, "Rng::integer: bound must be positive");
        std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            std::uint64_t r = eng_();
            if (r >= threshold) return r % bound;
        }
    }

    // Standard normal via Box-Muller on explicit uniforms.
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = kTwoPi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Index draw from an unnormalized weight vector (inverse-CDF walk).
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) fail(ErrorKind::Domain, "Rng::categorical: weights must sum to > 0");
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    // k distinct indices from [0, n), ascending. Floyd's algorithm.
    std::vector<std::uint64_t> sampleWithoutReplacement(std::uint64_t n, std::uint64_t k);

  private:
    std::mt19937_64 eng_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

inline std::vector<std::uint64_t> Rng::sampleWithoutReplacement(std::uint64_t n, std::uint64_t k) {
    if (k > n) fail(ErrorKind::Domain, "sampleWithoutReplacement: k > n");
    std::vector<std::uint64_t> out;
    out.reserve(k);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(k * 2);
    for (std::uint64_t j = n - k; j < n; ++j) {
        std::uint64_t t = integer(j + 1);
        std::uint64_t pick = seen.count(t) ? j : t;
        seen.insert(pick);
        out.push_back(pick);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace unitlab
