#pragma once

#include <cstdint>

#include "nlc/math.hpp"

namespace nlc {

// xoshiro256++ (Blackman & Vigna) seeded through SplitMix64, so a 64-bit seed
// fully determines the stream. Gaussian draws use Box-Muller with a cached
// spare, which makes the output a pure function of (seed, call sequence).
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t seed() const { return seed_; }

    uint64_t next_u64();

    // uniform on the open interval (0, 1)
    double uniform();
    // uniform on (lo, hi)
    double uniform(double lo, double hi);
    // uniform over {0, 1, ..., n-1}
    size_t uniform_index(size_t n);

    double gaussian();

    // Split rule for worker streams: the child seed is
    // mix64(parent_seed + 0x9E3779B97F4A7C15 * (stream + 1)), independent of
    // how much of the parent stream has been consumed.
    Rng fork(uint64_t stream) const;

private:
    uint64_t seed_;
    uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// n i.i.d. standard normal draws, advancing the rng state
Vec64 gaussian_vec(Rng& rng, size_t n);

}  // namespace nlc
