#include "nlc/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace nlc {

namespace {

// SplitMix64 finalizer (Steele, Lea & Flood)
uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

Rng::Rng(uint64_t seed) : seed_(seed) {
    uint64_t s = seed;
    for (auto& word : state_) {
        s += kGolden;
        word = mix64(s);
    }
}

uint64_t Rng::next_u64() {
    const uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    // 53 high bits, offset by half an ulp: never exactly 0 or 1
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    require(lo < hi, ErrorKind::invalid_range, "uniform: lo >= hi");
    return lo + (hi - lo) * uniform();
}

size_t Rng::uniform_index(size_t n) {
    require(n > 0, ErrorKind::invalid_range, "uniform_index: empty range");
    size_t k = static_cast<size_t>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
}

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

Rng Rng::fork(uint64_t stream) const {
    return Rng(mix64(seed_ + kGolden * (stream + 1)));
}

Vec64 gaussian_vec(Rng& rng, size_t n) {
    require(n >= 1, ErrorKind::invalid_range, "gaussian_vec: n must be >= 1");
    Vec64 out(n);
    for (auto& v : out) {
        v = rng.gaussian();
    }
    return out;
}

}  // namespace nlc
