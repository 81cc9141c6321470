#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace portbot {

/// Deterministic random stream. Streams are derived from one root seed by
/// hashing a label ("channel", "planner/2", ...) so every consumer draws
/// from its own sequence regardless of how many draws the others make.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : engine_(seed) {}

    static RngStream derive(std::uint64_t root_seed, std::string_view label);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1). Bit-exact across standard libraries.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

/// FNV-1a label hash mixed with the seed through splitmix64.
std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view label);

} // namespace portbot
