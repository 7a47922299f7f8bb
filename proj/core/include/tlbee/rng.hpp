#ifndef TLBEE_RNG_HPP
#define TLBEE_RNG_HPP

#include <cstdint>
#include <random>

namespace tlbee {

using Rng = std::mt19937_64;

/// Splitmix64 finalizer, used to decorrelate derived seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d4a2ca9da867b3ull;
  return z ^ (z >> 31);
}

/// Deterministic per-task stream: independent streams for distinct
/// (master, a, b) triples, stable across platforms and runs.
inline Rng derive_rng(std::uint64_t master, std::uint64_t a,
                      std::uint64_t b = 0) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ (a + 0x0123456789abcdefull));
  s = mix64(s ^ (b + 0xfedcba9876543210ull));
  return Rng(s);
}

}  // namespace tlbee

#endif  // TLBEE_RNG_HPP
