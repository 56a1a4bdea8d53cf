// philox.hpp: Philox4x32-10 counter-based generator
//
// Stateless: every output block is a pure function of (counter, key), so a
// trajectory's noise can be regenerated from (master seed, trajectory index,
// frequency bin) in any order and on any thread.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace sledbench::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32_10(Counter ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

// Uniform double in the open interval (0, 1) from 64 random bits.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Two independent standard normals for the given stream position.
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t trajectory,
                                             std::uint32_t stream, std::uint32_t index) {
    const Counter ctr = {index, stream, static_cast<std::uint32_t>(trajectory),
                         static_cast<std::uint32_t>(trajectory >> 32)};
    const Key key = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const Counter r = philox4x32_10(ctr, key);
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

// Uniform double in (0, 1) for the given stream position.
inline double uniform(std::uint64_t seed, std::uint64_t trajectory, std::uint32_t stream,
                      std::uint32_t index) {
    const Counter ctr = {index, stream, static_cast<std::uint32_t>(trajectory),
                         static_cast<std::uint32_t>(trajectory >> 32)};
    const Key key = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const Counter r = philox4x32_10(ctr, key);
    return to_open_unit(r[0], r[1]);
}

} // namespace sledbench::rng
