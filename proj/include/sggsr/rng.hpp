#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sggsr {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent substream seed from a master seed and a tuple of
/// counters, so every consumer of randomness is keyed by what it is rather
/// than by when it runs.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(seed, keys));
}

// Stream tags. Values are arbitrary but frozen: changing one changes outputs.
namespace stream {
inline constexpr std::uint64_t kStructureAttack = 1;
inline constexpr std::uint64_t kFeatureNoise = 2;
inline constexpr std::uint64_t kFraud = 3;
inline constexpr std::uint64_t kWalk = 4;
inline constexpr std::uint64_t kSkipGram = 5;
inline constexpr std::uint64_t kModelInit = 6;
inline constexpr std::uint64_t kNegatives = 7;
inline constexpr std::uint64_t kDropout = 8;
inline constexpr std::uint64_t kSbm = 9;
inline constexpr std::uint64_t kPrefAttach = 10;
inline constexpr std::uint64_t kExperiment = 11;
}  // namespace stream

}  // namespace sggsr
