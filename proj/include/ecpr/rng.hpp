#pragma once

#include <cmath>
#include <cstdint>

namespace ecpr {

// Counter-based seeded randomness. Every stochastic quantity in the simulator
// is drawn from a stream whose seed is derived from (global seed, stream id,
// integer keys), so results do not depend on evaluation order or thread count.

enum class StreamId : std::uint64_t {
    fading = 1,
    mac_coin = 2,
    enar_error = 3,
    placement = 4,
    turning = 5,
    context = 6,
    generic = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamId id,
                                    std::uint64_t a = 0, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(seed ^ (0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(id)));
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return splitmix64(state_);
    }

    // Uniform in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Index in [0, n).
    std::uint64_t next_index(std::uint64_t n) {
        return next_u64() % n;
    }

    // Standard normal via Box-Muller; no cached second value so the draw
    // count per call is fixed and reproducible.
    double next_normal() {
        double u1 = 1.0 - next_unit();  // (0, 1]
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double next_normal(double sigma) {
        return sigma == 0.0 ? 0.0 : sigma * next_normal();
    }

  private:
    std::uint64_t state_;
};

}  // namespace ecpr
