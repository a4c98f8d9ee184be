#pragma once

#include <cstdint>
#include <random>

namespace reidfuse {

/// Seedable, portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are *not* portable across library
/// implementations, so bounded integers and normals are derived here:
///   - uniform_index(n): rejection sampling on the top of the 64-bit range
///     (unbiased, no modulo skew).
///   - uniform01(): top 53 bits scaled by 2^-53, in [0, 1).
///   - normal(): Box-Muller, consuming two uniforms per call (no caching).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    double uniform01();

    /// Standard normal variate.
    double normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace reidfuse
