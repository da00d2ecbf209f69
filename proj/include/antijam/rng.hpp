#pragma once

#include <cstdint>
#include <random>

#include "antijam/common.hpp"

namespace antijam {

/// Independent substream of the master seed.  Streams are keyed by
/// (seed, run index, purpose tag) so Monte Carlo runs can execute in any
/// order, or in parallel, without sharing generator state.
enum class StreamTag : std::uint32_t {
  ChannelDraw = 1,
  UavSymbols = 2,
  JammerSymbols = 3,
  Noise = 4,
  Misc = 5,
};

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t run,
                                   StreamTag tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run & 0xffffffffu),
                    static_cast<std::uint32_t>(run >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

inline cxd circular_gaussian(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const double s = std::sqrt(variance / 2.0);
  return {s * n01(rng), s * n01(rng)};
}

}  // namespace antijam
