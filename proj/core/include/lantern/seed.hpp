#pragma once

#include <cstdint>

namespace lantern {

/// splitmix64 of (seed, stream, index): independent child seeds for
/// per-sample and per-layer random draws.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t z =
      seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)) ^ (0xD1B54A32D192ED03ULL * (index + 1));
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace lantern
