#pragma once

#include <cstdint>

namespace sievelab {

// 64-bit finalizer with full avalanche (SplitMix64 / MurmurHash3 mixer).
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Splittable stream derivation: every stream in the program is identified by
// a 64-bit key, and child keys are pure functions of (parent key, word).
// derive(key, word) = mix64(key ^ (kGolden * (word + 1))). Replicate i of a
// run with master seed s draws from key derive(s, i); a box reached from its
// parent via child index r uses derive(parent_key, r), with words 0 and ~0
// reserved for the box's stick and ball-placement streams. The construction
// is order-independent, so coupled simulations see identical weights for
// shared boxes regardless of traversal.
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t word) {
    return mix64(key ^ (kGolden * (word + 1)));
}

// Counter-based SplitMix64 engine seeded from a stream key.
class Rng {
  public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform on the open interval (0,1); never returns 0 or 1, so logs are safe.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform on [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double exponential(double rate = 1.0);
    double normal();
    double gamma(double shape, double rate = 1.0);
    double beta(double a, double b);

    // Exact Binomial(n, p): Bernoulli sums / geometric-skip inversion for small
    // mean, BTRD rejection for large. Never a normal approximation.
    std::uint64_t binomial(std::uint64_t n, double p);

  private:
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;

    std::uint64_t binomial_inversion(std::uint64_t n, double p);
    std::uint64_t binomial_btrd(std::uint64_t n, double p);
};

inline Rng replicate_stream(std::uint64_t master_seed, std::uint64_t replicate) {
    return Rng(derive_key(master_seed, replicate));
}

}  // namespace sievelab
