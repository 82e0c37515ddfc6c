#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace scalepop {

// Deterministic random source. Every helper consumes a fixed number of
// 64-bit words per call, so a seeded stream stays aligned no matter which
// strategy or code path asked for the draw. mt19937_64 output is pinned by
// the standard and the integer helpers avoid libm, which makes integer
// draws bit-identical across platforms as well as across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // One raw word.
    std::uint64_t word() { return gen_(); }

    // Fair coin from the low bit of one word.
    bool coin() { return (gen_() & 1u) != 0; }

    // Uniform integer on [lo, hi], both inclusive. One word, multiply-shift
    // reduction; the bias is span/2^64 and immaterial at simulation spans.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
        const unsigned __int128 prod = static_cast<unsigned __int128>(gen_()) * span;
        return lo + static_cast<std::int64_t>(static_cast<std::uint64_t>(prod >> 64));
    }

    // [0, 1) with 53-bit resolution. One word.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // (0, 1]; safe to pass through log(). One word.
    double unit_open() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

    // Basic Box-Muller without a cached spare: exactly two words per call.
    double gaussian(double mean, double sigma) {
        const double u1 = unit_open();
        const double u2 = unit();
        return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace scalepop
