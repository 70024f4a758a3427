#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace liqsim {

/// Seed plus a stream id so parallel workers can derive independent,
/// reproducible generators. Same (seed, stream) gives the same draws.
struct RngSeed {
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;

    [[nodiscard]] RngSeed with_stream(std::uint64_t id) const { return {seed, id}; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

inline std::mt19937_64 make_rng(RngSeed s) {
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(s.seed), hi(s.seed), lo(s.stream), hi(s.stream)};
    return std::mt19937_64(seq);
}

namespace detail {

/// Uniform double in [0, 1) with 53 random bits.
inline double canonical(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1].
inline double positive_canonical(std::mt19937_64& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

inline double exponential_draw(std::mt19937_64& rng, double rate) {
    return -std::log(positive_canonical(rng)) / rate;
}

inline double standard_normal(std::mt19937_64& rng) {
    const double u = positive_canonical(rng);
    const double v = canonical(rng);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
}

} // namespace detail

} // namespace liqsim
