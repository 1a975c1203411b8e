#pragma once

#include <cstdint>
#include <random>

namespace drpt {

// Deterministic uniform generator. The algorithm is pinned (mt19937_64 with
// the 53-bit mantissa mapping below) so that seeded runs are reproducible
// across platforms; reports identify it by name.
class Rng {
public:
    static constexpr const char* kAlgorithm = "mt19937_64-u53/v1";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace drpt
