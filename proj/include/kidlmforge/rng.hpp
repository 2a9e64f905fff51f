#pragma once

#include <cstdint>

namespace kidlm {

// Counter-based generator: every draw is a pure function of the key, so
// collation order and thread count cannot change the stream.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (a + 0x9E3779B97F4A7C15ULL));
  h = splitmix64(h ^ (b + 0xC2B2AE3D27D4EB4FULL));
  h = splitmix64(h ^ (c + 0x165667B19E3779F9ULL));
  return h;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                      std::uint64_t c = 0) {
  return static_cast<double>(mix(seed, a, b, c) >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n); n must be > 0.
inline std::uint64_t below(std::uint64_t n, std::uint64_t seed, std::uint64_t a,
                           std::uint64_t b, std::uint64_t c = 0) {
  return mix(seed, a, b, c) % n;
}

}  // namespace rng
}  // namespace kidlm
