#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace letfsim::rng {

// Substream tags. Every random decision in a run draws from an engine seeded
// by (master seed, tag, index), so scenario flags never shift another
// component's stream.
inline constexpr std::uint64_t kAgentInit = 1;    // per-agent weight/lag initialization
inline constexpr std::uint64_t kAgentDraws = 2;   // per-agent activation draws
inline constexpr std::uint64_t kActivation = 3;   // which agent acts each step
inline constexpr std::uint64_t kMisorderFutures = 4;
inline constexpr std::uint64_t kMisorderLetf = 5;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                           std::uint64_t index = 0) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (tag * 0x9E3779B97F4A7C15ull));
    s = splitmix64(s ^ (index * 0xD1B54A32D192ED03ull));
    return s;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t master, std::uint64_t tag, std::uint64_t index = 0) {
    return Engine{derive_seed(master, tag, index)};
}

// Uniform double in [0, 1). Hand-rolled instead of std::uniform_real_distribution
// so the value sequence is pinned by the engine alone, not the standard library.
inline double canonical(Engine& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller, always consuming exactly two engine values.
inline double gauss(Engine& g) {
    const double u1 = 1.0 - canonical(g);  // (0, 1]
    const double u2 = canonical(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

// Uniform integer in [lo, hi], consuming exactly one engine value.
inline std::int64_t uniform_int(Engine& g, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    auto offset = static_cast<std::int64_t>(canonical(g) * span);
    if (offset > hi - lo) offset = hi - lo;
    return lo + offset;
}

}  // namespace letfsim::rng
