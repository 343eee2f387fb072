#pragma once

#include <cstdint>
#include <random>

namespace mdobf {

// Substream identifiers. Every random draw in a run comes from the scenario
// seed mixed with one of these, so changing how many noise samples are drawn
// never perturbs the payload bits or the gait phase.
enum class Stream : std::uint64_t {
  kBits = 1,
  kNoise = 2,
  kWalker = 3,
  kLinkNoise = 4,
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed of substream `stream`, block `index`, derived from the scenario seed.
std::uint64_t substream_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return std::mt19937_64(substream_seed(seed, stream, index));
}

}  // namespace mdobf
