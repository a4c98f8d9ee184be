#include "reidfuse/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "reidfuse/error.hpp"

namespace reidfuse {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) throw InvariantError("uniform_index called with empty range");
    constexpr auto max = std::numeric_limits<std::uint64_t>::max();
    // largest multiple of n that fits; draws at or above it are rejected
    const std::uint64_t limit = max - (max % n + 1) % n;
    while (true) {
        const std::uint64_t x = engine_();
        if (x <= limit) return x % n;
    }
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace reidfuse
