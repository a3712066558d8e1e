#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace riskplan {

/// Deterministic random stream. The uniform and normal draws are generated
/// from raw mt19937_64 output with fixed arithmetic, so sequences are
/// reproducible across platforms and standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(scramble(seed)) {}

    /// Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard Box-Muller draw; two uniforms consumed per call.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * std::numbers::pi * u2);
        return mean + stddev * z;
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Independent substream derived from this seed and a tag.
    Rng fork(std::uint64_t tag) const { return Rng(seed_ ^ scramble(tag ^ 0x5851f42d4c957f2dull)); }

private:
    static std::uint64_t scramble(std::uint64_t v) {
        // splitmix64 finalizer
        v += 0x9e3779b97f4a7c15ull;
        v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
        v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
        return v ^ (v >> 31);
    }

    std::uint64_t seed_ = 0;
    std::mt19937_64 engine_;
};

}  // namespace riskplan
