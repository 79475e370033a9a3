#pragma once

#include <cstdint>
#include <random>

// Counter-based seeding: every subject / replication gets its own stream
// derived from (seed, index), so results do not depend on evaluation order
// and any single replication can be reproduced in isolation.

namespace psp::rng {

// splitmix64 finalizer; full-period mixing of a 64-bit counter
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// stable sub-stream seed for a (seed, index) pair
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  return mix(seed ^ mix(index));
}

// uniform draw in [0,1) from a single counter value
inline double uniform01(std::uint64_t state) {
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

inline std::mt19937_64 engine(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(substream(seed, index));
}

}  // namespace psp::rng
