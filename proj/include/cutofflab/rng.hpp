#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace cutofflab::rng {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block of four
// 32-bit outputs is a pure function of (counter, key), so any substream can be
// evaluated independently of every other one.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key);
};

// Stream of standard normals identified by (seed, stream); used for path
// `stream` of a simulation seeded with `seed`. Pair j holds normals 2j and 2j+1
// of the stream.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::pair<double, double> pair(std::uint64_t index) const noexcept;

private:
    Philox4x32::Key key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
};

// 52-bit uniform in the open interval (0, 1) from two 32-bit words.
double uniform_open(std::uint32_t hi, std::uint32_t lo) noexcept;

}  // namespace cutofflab::rng
