#pragma once

#include <cstdint>

namespace faultline {

// splitmix64: the project-wide deterministic generator. Small state,
// well-studied, and trivially reproducible across platforms.
struct SplitMix64 {
  uint64_t state = 0;

  explicit SplitMix64(uint64_t seed = 0) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). n is tiny relative to 2^64 everywhere we use this,
  // so the modulo bias is far below anything a chi-square test can see.
  uint64_t next_below(uint64_t n) { return next() % n; }
};

// Per-trial seed derivation: trial i of a campaign with seed s uses
// SplitMix64(mix64(s, i)), so any trial is reproducible in isolation.
uint64_t mix64(uint64_t seed, uint64_t index);

}  // namespace faultline
