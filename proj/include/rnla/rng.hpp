#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace rnla {

// Counter-based random stream built on the Philox 2x64 block cipher
// (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC'11).
// The state is the triple (seed, stream_id, counter); the output at any
// counter position is a pure function of the triple, so streams are
// cheap to copy, split, and replay.
struct RngStream {
    std::uint64_t seed      = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t counter   = 0;
};

namespace detail {

inline constexpr std::uint64_t kPhiloxM2x64  = 0xD2B74407B1CE6E93ULL;
inline constexpr std::uint64_t kPhiloxW2x64  = 0x9E3779B97F4A7C15ULL;
inline constexpr int           kPhiloxRounds = 10;

inline std::uint64_t philox2x64(std::uint64_t x0, std::uint64_t x1, std::uint64_t key) {
    for (int r = 0; r < kPhiloxRounds; ++r) {
        const auto prod = static_cast<unsigned __int128>(kPhiloxM2x64) * x0;
        const auto hi   = static_cast<std::uint64_t>(prod >> 64);
        const auto lo   = static_cast<std::uint64_t>(prod);
        x0 = hi ^ key ^ x1;
        x1 = lo;
        key += kPhiloxW2x64;
    }
    return x0;
}

// SplitMix64 finalizer; a bijection on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

inline RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id = 0) {
    return RngStream{seed, stream_id, 0};
}

// Derives the k-th child stream.  k |-> stream_id is injective for a fixed
// parent: both the affine step and the finalizer are bijections on uint64.
inline RngStream substream(const RngStream& parent, std::uint64_t k) {
    const std::uint64_t child_id =
        detail::mix64(parent.stream_id + detail::kPhiloxW2x64 * (k + 1)) ^ detail::mix64(~parent.seed);
    return RngStream{parent.seed, child_id, 0};
}

inline std::uint64_t next_u64(RngStream& rs) {
    return detail::philox2x64(rs.counter++, rs.stream_id, rs.seed);
}

// Uniform on [0, 1), 53-bit resolution.
inline double uniform(RngStream& rs) {
    return static_cast<double>(next_u64(rs) >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1); never returns 0, safe under log().
inline double uniform_open(RngStream& rs) {
    return (static_cast<double>(next_u64(rs) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller; consumes exactly two raw draws.
inline double standard_normal(RngStream& rs) {
    const double u1 = uniform_open(rs);
    const double u2 = uniform(rs);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// +1 or -1 with equal probability.
inline double random_sign(RngStream& rs) {
    return (next_u64(rs) >> 63) ? 1.0 : -1.0;
}

// Uniform index in {0, ..., n-1} via the fixed-point multiply reduction.
inline std::size_t uniform_index(RngStream& rs, std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64(rs)) * n) >> 64);
}

// Inverse-CDF draw from a discrete distribution given its cumulative
// weights (nondecreasing, last entry = total mass).
inline std::size_t discrete_from_cumulative(RngStream& rs, const std::vector<double>& cumulative) {
    const double u = uniform(rs) * cumulative.back();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cumulative[mid] <= u)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo;
}

} // namespace rnla
