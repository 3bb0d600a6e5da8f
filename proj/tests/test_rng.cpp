#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "lmc/rng.hpp"

// Reference implementation written out independently from the published
// xoshiro256++ / splitmix64 descriptions, so the production generator is
// checked against the algorithm rather than against itself.
namespace {

struct RefXoshiro {
    std::uint64_t s[4];

    explicit RefXoshiro(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (int i = 0; i < 4; ++i) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            s[i] = z ^ (z >> 31);
        }
    }

    static std::uint64_t rol(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t next() {
        const std::uint64_t out = rol(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rol(s[3], 45);
        return out;
    }
};

}  // namespace

TEST_CASE("raw 64-bit stream matches the reference algorithm") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0x8000000000000000ULL, 0xFFFFFFFFFFFFFFFFULL}) {
        lmc::Rng rng(seed);
        RefXoshiro ref(seed);
        for (int i = 0; i < 1000; ++i) CHECK(rng.next_u64() == ref.next());
    }
}

TEST_CASE("uniform doubles use the documented 53-bit mapping") {
    lmc::Rng rng(7);
    RefXoshiro ref(7);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.next_double();
        const double expected = static_cast<double>(ref.next() >> 11) * 0x1.0p-53;
        CHECK(d == expected);
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
    }
}

TEST_CASE("next_in maps onto [lo, hi)") {
    lmc::Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.next_in(-0.25, 0.75);
        CHECK(d >= -0.25);
        CHECK(d < 0.75);
    }
}

TEST_CASE("bounded integers follow the documented rejection scheme") {
    lmc::Rng rng(123);
    RefXoshiro ref(123);
    for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 100ULL, 1ULL << 40}) {
        for (int i = 0; i < 200; ++i) {
            const std::uint64_t threshold = (0 - bound) % bound;
            std::uint64_t r = ref.next();
            while (r < threshold) r = ref.next();
            CHECK(rng.next_below(bound) == r % bound);
        }
    }
}

TEST_CASE("gaussian pairs are Box-Muller over two uniforms") {
    lmc::Rng rng(5);
    RefXoshiro ref(5);
    for (int i = 0; i < 500; ++i) {
        const auto [a, b] = rng.next_gaussian_pair();
        double u1 = static_cast<double>(ref.next() >> 11) * 0x1.0p-53;
        while (u1 <= 0.0) u1 = static_cast<double>(ref.next() >> 11) * 0x1.0p-53;
        const double u2 = static_cast<double>(ref.next() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        CHECK(a == r * std::cos(2.0 * M_PI * u2));
        CHECK(b == r * std::sin(2.0 * M_PI * u2));
        CHECK(std::isfinite(a));
        CHECK(std::isfinite(b));
    }
}

TEST_CASE("gaussian moments are sane over a long stream") {
    lmc::Rng rng(2024);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n / 2; ++i) {
        const auto [a, b] = rng.next_gaussian_pair();
        sum += a + b;
        sq += a * a + b * b;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("shuffle is Fisher-Yates over the documented draws") {
    lmc::Rng rng(99);
    RefXoshiro ref(99);
    std::vector<int> v(25);
    std::iota(v.begin(), v.end(), 0);
    std::vector<int> expected = v;
    for (std::size_t i = expected.size(); i > 1; --i) {
        const std::uint64_t threshold = (0 - i) % i;
        std::uint64_t r = ref.next();
        while (r < threshold) r = ref.next();
        std::swap(expected[i - 1], expected[r % i]);
    }
    lmc::shuffle(v, rng);
    CHECK(v == expected);

    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 25; ++i) CHECK(sorted[i] == i);  // still a permutation
}

TEST_CASE("identical seeds give identical streams") {
    lmc::Rng a(3141), b(3141);
    for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
}
