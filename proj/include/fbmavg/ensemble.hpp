#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fbmavg/fgn.hpp"

namespace fbmavg {

/// Path r is generated from the noise stream stream_seed(seed, r, 0).
///
/// `threads` <= 0 uses the OpenMP default. Output is bit-identical to
/// generate_ensemble_serial for every thread count.
std::vector<FbmPath> generate_ensemble(const FbmGenerator& generator, std::size_t count,
                                       std::uint64_t seed, int threads = 0);

/// Single-threaded reference for generate_ensemble.
std::vector<FbmPath> generate_ensemble_serial(const FbmGenerator& generator, std::size_t count,
                                              std::uint64_t seed);

/// Generates path r of an ensemble.
FbmPath generate_member(const FbmGenerator& generator, std::uint64_t seed, std::size_t r);

}  // namespace fbmavg
