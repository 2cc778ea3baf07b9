#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace aviary::synth {

// Portable random source: the engine is std::mt19937_64 (output sequence fixed
// by the C++ standard); uniforms take the top 53 bits; normals use the
// Box-Muller transform. Library distributions are avoided because their
// algorithms differ between standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Independent stream seed for (seed, stream) via SplitMix64 mixing.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next() { return engine_(); }
    // [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Integer in [lo, hi] by rejection, no modulo bias.
    long long uniform_int(long long lo, long long hi);
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

}  // namespace aviary::synth
