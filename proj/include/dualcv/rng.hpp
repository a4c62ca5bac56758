#pragma once

#include "dualcv/bvn.hpp"

#include <cstdint>

namespace dualcv::rng {

// splitmix64 finalizer (Steele, Lea & Flood 2014): the usual mix of shifts
// and odd multiplies; bijective on 64-bit words.
inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based stream: every (seed, rep, unit, slot) tuple maps to one
// 64-bit word, so draws are identical no matter how work is scheduled.
inline std::uint64_t at(std::uint64_t seed, std::uint64_t rep, std::uint64_t unit,
                        std::uint64_t slot) {
    std::uint64_t h = mix(seed ^ 0x8f52a64bc0210cbdULL);
    h = mix(h ^ rep);
    h = mix(h ^ unit);
    h = mix(h ^ slot);
    return h;
}

// Uniform on the open interval (0, 1): top 52 bits plus a half step. Every
// intermediate value is exactly representable, so unlike the usual 53-bit
// recipe the result cannot round up to 1.0.
inline double uniform01(std::uint64_t word) {
    return (static_cast<double>(word >> 12) + 0.5) * 0x1.0p-52;
}

// Standard normal via the inverse CDF; exact given the quantile function.
inline double normal(std::uint64_t word) { return norm_quantile(uniform01(word)); }

// Uniform index in [0, n).
inline std::size_t pick(std::uint64_t word, std::size_t n) {
    return static_cast<std::size_t>(uniform01(word) * static_cast<double>(n));
}

}  // namespace dualcv::rng
