#pragma once

#include <cstdint>

namespace bhh::rng {

// Stream tags used to derive independent counter-based streams from one seed.
// Every consumer of randomness in the library names its stream here so that
// two different consumers can never collide on the same (seed, index) pair.
inline constexpr std::uint64_t kStreamBaseX = 1;
inline constexpr std::uint64_t kStreamBaseY = 2;
inline constexpr std::uint64_t kStreamShift = 3;
inline constexpr std::uint64_t kStreamRep = 4;
inline constexpr std::uint64_t kStreamSolver = 5;
inline constexpr std::uint64_t kStreamCheckpoint = 6;
inline constexpr std::uint64_t kStreamRepBase = 7;
inline constexpr std::uint64_t kStreamRepShift = 8;
inline constexpr std::uint64_t kStreamInstance = 9;

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless counter-based value: a chain of avalanche rounds over
// (seed, stream, index). There is no sequential state, so any index --
// including negative ones cast to uint64 -- can be evaluated in O(1).
constexpr std::uint64_t counter_mix(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ index);
  return h;
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t h) noexcept {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Near-uniform integer in [0, n); bias is O(n / 2^64).
constexpr std::uint64_t bounded(std::uint64_t h, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(h) * n) >> 64);
}

constexpr std::uint64_t index_of(std::int64_t t) noexcept {
  return static_cast<std::uint64_t>(t);
}

}  // namespace bhh::rng
