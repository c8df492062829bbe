#include <doctest.h>

#include <cmath>
#include <set>

#include "cutofflab/rng.hpp"

using cutofflab::rng::NormalStream;
using cutofflab::rng::Philox4x32;

TEST_SUITE("rng") {

// Known-answer vectors of the Random123 reference implementation.
TEST_CASE("Philox4x32-10 known answers") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) ==
          C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                               K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                               K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniform_open stays inside (0, 1)") {
    CHECK(cutofflab::rng::uniform_open(0, 0) > 0.0);
    CHECK(cutofflab::rng::uniform_open(0xffffffff, 0xffffffff) < 1.0);
}

TEST_CASE("normal streams: pure, distinct and standard") {
    const NormalStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    CHECK(a.pair(3) == b.pair(3));
    CHECK(a.pair(3) != c.pair(3));
    CHECK(a.pair(3) != d.pair(3));
    CHECK(a.pair(3) != a.pair(4));
    CHECK(a.pair(3) != a.pair(std::uint64_t{3} << 32));

    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    const int n = 200000;
    for (int k = 0; k < n / 2; ++k) {
        const auto [x, y] = a.pair(static_cast<std::uint64_t>(k));
        for (double v : {x, y}) {
            sum += v;
            sum2 += v * v;
            sum4 += v * v * v * v;
        }
    }
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sum2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(sum4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

}  // TEST_SUITE
