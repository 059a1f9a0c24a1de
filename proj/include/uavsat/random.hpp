#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace uavsat {

// Deterministic, platform-independent random stream (splitmix64 core).
// Standard-library distributions are implementation-defined, so the few
// samplers needed here are spelled out explicitly: identical seeds give
// identical draws on every platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller; two uniforms per draw, no cached spare.
    double gaussian(double sd) {
        if (sd == 0.0) return 0.0;
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return sd * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

// Derives an independent sub-stream from a base seed. Used to give each
// augmentation its own stream so toggling one does not perturb the others.
inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t stream_id) {
    RandomStream mixer(seed ^ (0xA24BAED4963EE407ull * (stream_id + 1)));
    return RandomStream(mixer.next_u64());
}

}  // namespace uavsat
