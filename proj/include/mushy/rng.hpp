#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mushy {

// Counter-based random numbers: every draw is a pure function of
// (seed, replica, mode, step), so sampled paths do not depend on evaluation
// order or thread count. The block cipher is Philox 4x64 with 10 rounds.
namespace rng {

struct Block {
    std::array<std::uint64_t, 4> x;
};

inline Block philox4x64(std::array<std::uint64_t, 4> ctr, std::array<std::uint64_t, 2> key) {
    constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
    constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
    constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
    constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;
    for (int round = 0; round < 10; ++round) {
        const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * ctr[0];
        const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * ctr[2];
        const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
        const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
        const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
        const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return Block{ctr};
}

inline double u01_half_open(std::uint64_t w) {  // [0, 1)
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}
inline double u01_open_closed(std::uint64_t w) {  // (0, 1]
    return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal via Box–Muller from two 64-bit words.
inline double standard_normal(std::uint64_t w0, std::uint64_t w1) {
    const double u1 = u01_open_closed(w0);
    const double u2 = u01_half_open(w1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Gaussian increment with variance dt for the stream cell
/// (seed, replica, mode, step).
inline double normal_increment(std::uint64_t seed, std::uint64_t replica, std::uint64_t mode,
                               std::uint64_t step, double dt) {
    const Block b = philox4x64({step, mode, replica, 0x5354464eull}, {seed, 0x6d757368ull});
    return standard_normal(b.x[0], b.x[1]) * std::sqrt(dt);
}

/// Deterministic derivation of a sub-stream seed (e.g. one per truncation
/// radius in an experiment).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    const Block b = philox4x64({salt, 0, 0, 0x64657276ull}, {base, 0x7365656dull});
    return b.x[0];
}

}  // namespace rng
}  // namespace mushy
