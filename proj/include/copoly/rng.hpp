// Counter-based splittable RNG used by all samplers.
//
// next() = mix64(key + ctr * GOLDEN): a keyed SplitMix64 stream. Streams are
// derived, not advanced-and-shared: split(tag) produces an independent key,
// so concurrent sub-samplers stay reproducible for a fixed root seed.
#pragma once

#include <cstdint>

namespace copoly {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}
}  // namespace detail

class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
        : key_(detail::mix64(seed ^ (0xA076'1D64'78BD'642Full * (stream + 1)))), ctr_(0) {}

    // Independent stream keyed off (this stream, tag). Does not disturb *this.
    Rng split(std::uint64_t tag) const {
        Rng child(0);
        child.key_ = detail::mix64(key_ ^ detail::mix64(tag + 0x9E3779B97F4A7C15ull));
        child.ctr_ = 0;
        return child;
    }

    std::uint64_t next_u64() { return detail::mix64(key_ + (++ctr_) * 0x9E3779B97F4A7C15ull); }

    // Uniform in [0, 1), 53 random bits.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free multiply-shift; bias < 2^-64, irrelevant here.
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double prob) { return u01() < prob; }

  private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

}  // namespace copoly
