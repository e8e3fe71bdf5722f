#pragma once

#include <cmath>
#include <cstdint>

#include "refldiff/common.hpp"

namespace refldiff {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based stream keyed by (seed, stream index). Draw k is a pure
/// function of (key, k), so per-path streams are independent of scheduling
/// and any worker layout.
class CounterRng {
public:
    CounterRng() : key_(0) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(detail::splitmix64(seed ^ detail::splitmix64(stream + 0x51ed2701ULL))) {}

    std::uint64_t next_u64() { return detail::splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_); }

    /// Uniform on (0,1); never returns 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    /// Standard normal via Box-Muller; consumes two counters, returns one
    /// variate (the sine partner is discarded to keep consumption per draw
    /// fixed).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Both Box-Muller variates from one pair of counters.
    void normal_pair(double& z0, double& z1) {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        z0 = r * std::cos(a);
        z1 = r * std::sin(a);
    }

    /// Normal clamped to [-c, c].
    double normal_clamped(double c) {
        double z = normal();
        if (z > c) return c;
        if (z < -c) return -c;
        return z;
    }

    double exponential() { return -std::log(uniform()); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    Vecd normal_vec(int d, double clamp = 0.0) {
        Vecd z(d);
        for (int i = 0; i + 1 < d; i += 2) normal_pair(z[i], z[i + 1]);
        if (d % 2) z[d - 1] = normal();
        if (clamp > 0.0) {
            for (int i = 0; i < d; ++i)
                z[i] = z[i] > clamp ? clamp : (z[i] < -clamp ? -clamp : z[i]);
        }
        return z;
    }

    std::uint64_t counter() const { return ctr_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t ctr_ = 0;
};

/// 2D/anyD Halton-style quasi-random points in [0,1)^d (probe fallback
/// sampling; deterministic, no state).
inline Vecd halton_point(std::uint64_t index, int dim) {
    static const int primes[kMaxDim] = {2,  3,  5,  7,  11, 13, 17, 19,
                                        23, 29, 31, 37, 41, 43, 47, 53};
    Vecd p(dim);
    for (int d = 0; d < dim; ++d) {
        std::uint64_t i = index + 1;
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= primes[d];
            r += f * static_cast<double>(i % primes[d]);
            i /= primes[d];
        }
        p[d] = r;
    }
    return p;
}

}  // namespace refldiff
