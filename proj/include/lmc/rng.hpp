#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace lmc {

// Portable deterministic RNG used everywhere a seed appears in this project.
//
// Generator: xoshiro256++ (Blackman & Vigna), state initialized from the
// 64-bit seed by four steps of splitmix64. Derived draws are fixed so that a
// reimplementation in another language reproduces streams bit-exactly:
//   uniform double in [0,1):  (next() >> 11) * 2^-53
//   bounded integer:          rejection sampling on the high bits (see below)
//   gaussian pair:            Box-Muller on two uniform draws
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& si : s_) {
            // splitmix64
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            si = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, bound). Unbiased: draw 64 bits, reject values in
    // the tail `2^64 mod bound` short of a full multiple of bound.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Two independent N(0,1) samples via Box-Muller; consumes two uniforms.
    std::pair<double, double> next_gaussian_pair() {
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();  // log(0) guard
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t s_[4];
};

// Fisher-Yates, descending index, swap target drawn via next_below.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace lmc
