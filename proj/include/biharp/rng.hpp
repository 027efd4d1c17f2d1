#pragma once

#include <cmath>
#include <cstdint>

namespace biharp {

/// SplitMix64 step; used for seeding and for deriving per-fixture sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derive the k-th sub-seed of a master seed (one SplitMix64 step).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
    std::uint64_t s = master + 0x9E3779B97F4A7C15ULL * (k + 1);
    return splitmix64(s);
}

/// xoshiro256++ (Blackman/Vigna).  Integer-only state transitions, so the
/// stream is bit-identical on every conforming platform.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) via rejection-free Lemire-style scaling.
    std::uint64_t below(std::uint64_t bound) {
        __uint128_t m = static_cast<__uint128_t>(next()) * bound;
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller.  Consumes exactly two uniforms per
    /// call, so the stream layout does not depend on past draws.
    double gaussian() {
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Random sign in {-1.0, +1.0}.
    double sign() { return (next() >> 63) ? -1.0 : 1.0; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

}  // namespace biharp
