#pragma once
// Counter-based RNG. Philox4x32-10 keyed by (seed, stream); the per-step
// counter makes draws addressable, so a path can be extended lazily and
// replications can be fanned out over independent streams without any
// shared mutable state.

#include <cstdint>
#include <cmath>
#include <utility>

namespace mtb {

namespace detail {

constexpr uint32_t kPhiloxW32A = 0x9E3779B9;
constexpr uint32_t kPhiloxW32B = 0xBB67AE85;
constexpr uint32_t kPhiloxM4x32A = 0xD2511F53;
constexpr uint32_t kPhiloxM4x32B = 0xCD9E8D57;

inline void philox_round(uint32_t c[4], const uint32_t k[2]) {
    uint64_t p0 = static_cast<uint64_t>(kPhiloxM4x32A) * c[0];
    uint64_t p1 = static_cast<uint64_t>(kPhiloxM4x32B) * c[2];
    uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    uint32_t out[4] = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    c[0] = out[0]; c[1] = out[1]; c[2] = out[2]; c[3] = out[3];
}

inline void philox4x32_10(uint32_t c[4], uint32_t k0, uint32_t k1) {
    uint32_t k[2] = {k0, k1};
    for (int r = 0; r < 10; ++r) {
        if (r > 0) { k[0] += kPhiloxW32A; k[1] += kPhiloxW32B; }
        philox_round(c, k);
    }
}

} // namespace detail

constexpr double kTwoPi = 6.283185307179586476925286766559;

// One 128-bit output block: two 64-bit words, each yielding one double.
struct RngBlock {
    uint32_t w[4];

    uint64_t word64(int i) const {
        return static_cast<uint64_t>(w[2 * i]) | (static_cast<uint64_t>(w[2 * i + 1]) << 32);
    }
    // uniform on (0,1), never returns an endpoint
    double u01(int i) const {
        return (static_cast<double>(word64(i) >> 11) + 0.5) * 0x1.0p-53;
    }
    // low bit, disjoint from the 53 bits used by u01
    bool bit(int i) const { return (word64(i) & 1u) != 0; }

    std::pair<double, double> gauss_pair() const {
        double r = std::sqrt(-2.0 * std::log(u01(0)));
        double t = kTwoPi * u01(1);
        return {r * std::cos(t), r * std::sin(t)};
    }
    double gauss() const { return gauss_pair().first; }
    double exponential(int i) const { return -std::log(u01(i)); }
};

// Addressable stream of blocks: block(step, slot) is a pure function of
// (seed, stream, step, slot).
class StepRng {
  public:
    StepRng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    RngBlock block(uint64_t step, uint32_t slot = 0) const {
        RngBlock b;
        b.w[0] = static_cast<uint32_t>(step);
        b.w[1] = static_cast<uint32_t>(step >> 32) ^ slot;
        b.w[2] = static_cast<uint32_t>(stream_);
        b.w[3] = static_cast<uint32_t>(stream_ >> 32);
        detail::philox4x32_10(b.w, static_cast<uint32_t>(seed_),
                              static_cast<uint32_t>(seed_ >> 32));
        return b;
    }

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

  private:
    uint64_t seed_;
    uint64_t stream_;
};

} // namespace mtb
