#pragma once

// Counter-based seed splitting. Every noise vector is a pure function of
// (master seed, replicate index, stream index), so adding replicates or
// changing the thread count never perturbs existing streams.

#include <cstdint>
#include <span>
#include <vector>

namespace fbmavg {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// seed = splitmix64(splitmix64(splitmix64(master) ^ replicate) ^ stream)
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replicate,
                                    std::uint64_t stream = 0) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ replicate) ^ stream);
}

/// Fills `out` with iid N(0,1) draws from a mt19937_64 seeded with `seed`.
void fill_standard_normal(std::span<double> out, std::uint64_t seed);

std::vector<double> standard_normal(std::size_t n, std::uint64_t seed);

}  // namespace fbmavg
