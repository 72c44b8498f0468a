#include "faultline/rng.hpp"

namespace faultline {

namespace {

// splitmix64 finalizer
uint64_t mix(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t mix64(uint64_t seed, uint64_t index) {
  return mix(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace faultline
