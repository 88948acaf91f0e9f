#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "predformer/errors.hpp"

namespace predformer {

// SplitMix64 step; used for seeding and for deriving independent streams.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives the seed of a named sub-stream from a root seed. Every source of
// randomness in the project (data, init, dropout, ...) gets its own stream
// index so that changing one stream never perturbs the others.
inline uint64_t derive_seed(uint64_t root, uint64_t stream) {
    uint64_t s = root ^ (stream * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// Fixed stream indices for derive_seed.
namespace seed_stream {
inline constexpr uint64_t kData = 1;
inline constexpr uint64_t kInit = 2;
inline constexpr uint64_t kDropout = 3;
inline constexpr uint64_t kShuffle = 4;
}  // namespace seed_stream

// xoshiro256** generator. Hand-rolled (not std::mt19937 + distributions)
// so that sequences are bit-identical across standard libraries and
// platforms, which the data generator and training loop rely on.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller. The second variate is discarded so the
    // generator state is a pure function of the number of calls.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Normal(0, std) resampled until |z| <= bound_stds standard deviations.
    double truncated_normal(double stddev, double bound_stds = 2.0) {
        double z = normal();
        while (std::abs(z) > bound_stds) z = normal();
        return z * stddev;
    }

    // Uniform integer in [lo, hi], both inclusive. Rejection sampling keeps
    // the distribution exact.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        if (lo > hi) throw Error("uniform_int: empty range");
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<int64_t>(next_u64());  // full 64-bit range
        const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t r = next_u64();
        while (r >= limit) r = next_u64();
        return lo + static_cast<int64_t>(r % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::array<uint64_t, 4> state() const { return state_; }
    void set_state(const std::array<uint64_t, 4>& s) { state_ = s; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> state_{};
};

}  // namespace predformer
