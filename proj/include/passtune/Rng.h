//===-- Rng.h - Deterministic PRNG with a portable contract -----*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Every randomized component of passtune (k-means++ seeding, the GA, sampled
// synergy mining, the suite generator) draws from this generator and nothing
// else. Standard-library distributions are implementation-defined, so they
// must never be used: seeded runs are required to be bit-reproducible across
// platforms and easy to reimplement in other languages.
//
// Contract (SplitMix64):
//   nextU64():    state += 0x9E3779B97F4A7C15
//                 z = state
//                 z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                 return z ^ (z >> 31)
//   nextDouble(): (nextU64() >> 11) * 2^-53, uniform in [0, 1)
//   nextBelow(n): nextU64() % n (modulo bias is negligible for n << 2^64)
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_RNG_H
#define PASSTUNE_RNG_H

#include <cstdint>

namespace passtune {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t nextU64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double nextDouble() {
    return static_cast<double>(nextU64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be nonzero.
  std::uint64_t nextBelow(std::uint64_t n) { return nextU64() % n; }

private:
  std::uint64_t state_;
};

/// Derives the seed of an independent stream (one mixing step of the base
/// generator applied to base + stream). Used to give each pipeline stage its
/// own stream from a single run seed.
inline std::uint64_t subSeed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace passtune

#endif // PASSTUNE_RNG_H
