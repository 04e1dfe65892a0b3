#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace frameflow {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based key derivation: the result depends only on the inputs.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    for (std::uint64_t k : keys) {
        s = h ^ (k + 0x632be59bd9b4e019ULL);
        h = splitmix64(s);
    }
    return h;
}

// xoshiro256++ (Blackman and Vigna).
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed = 0) {
        for (auto& w : s_) w = splitmix64(seed);
    }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Per-path random source: a Gaussian stream for Brownian increments and a
// separate uniform stream for boundary-crossing tests. The antithetic twin of
// a path uses the same seed with negated normals.
class PathRng {
public:
    PathRng(std::uint64_t seed, bool negate = false)
        : normal_(seed), uniform_(seed ^ 0x5851f42d4c957f2dULL), negate_(negate) {}

    double normal() {
        const double z = gauss_(normal_);
        return negate_ ? -z : z;
    }
    double uniform() { return static_cast<double>(uniform_() >> 11) * 0x1.0p-53; }

private:
    Xoshiro256pp normal_;
    Xoshiro256pp uniform_;
    std::normal_distribution<double> gauss_;
    bool negate_;
};

}  // namespace frameflow
