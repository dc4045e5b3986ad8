#pragma once

#include <cstdint>
#include <random>

namespace ergraph {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the stream used by replica `replica` of a run seeded with `seed`.
///
/// stream(seed, r) = splitmix64(seed ^ splitmix64(r ^ 0x6a09e667f3bcc909)).
/// Every replica owns an independent generator, so results do not depend on
/// the order or the thread in which replicas are processed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replica) noexcept {
  return splitmix64(seed ^ splitmix64(replica ^ 0x6a09e667f3bcc909ULL));
}

/// Generator type used throughout the library.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t replica) {
  return Rng(stream_seed(seed, replica));
}

} // namespace ergraph
