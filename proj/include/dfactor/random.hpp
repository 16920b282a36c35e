#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dfactor {

/// SplitMix64 (Steele, Lea, Flood 2014): 64-bit state, additive Weyl
/// sequence followed by a 64-bit finalizer. Output is identical on every
/// platform, which std::*_distribution does not guarantee.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal by Box-Muller; both variates of a pair are used.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Independent generator for one purpose within a run. Streams are keyed by
/// (seed, stream id) so adding draws to one stream never shifts another.
inline SplitMix64 make_stream(std::uint64_t seed, std::uint64_t stream_id) {
    SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (stream_id + 1)));
    return SplitMix64(mixer.next());
}

} // namespace dfactor
