#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "faultline/vm.hpp"

using namespace faultline;

namespace {

// field-level oracle: build the pattern from sign/exponent/mantissa directly
uint64_t make_bits(uint64_t sign, uint64_t exponent, uint64_t mantissa) {
  return (sign << 63) | (exponent << 52) | mantissa;
}

}  // namespace

TEST_CASE("sign bit of 1.0 gives -1.0") {
  uint64_t one = double_to_bits(1.0);
  CHECK(bits_to_double(apply_bitflip(one, 63)) == -1.0);
}

TEST_CASE("top exponent bit of 1.0 gives +infinity") {
  // 1.0 has exponent 0x3FF; flipping bit 62 sets it to 0x7FF with a zero
  // mantissa, which the field oracle says is +inf
  uint64_t one = double_to_bits(1.0);
  uint64_t expected = make_bits(0, 0x7FF, 0);
  CHECK(apply_bitflip(one, 62) == expected);
  CHECK(std::isinf(bits_to_double(expected)));
  CHECK(bits_to_double(expected) > 0);
}

TEST_CASE("bit 52 of +0.0 gives the smallest normal") {
  uint64_t zero = double_to_bits(0.0);
  uint64_t expected = make_bits(0, 1, 0);
  CHECK(apply_bitflip(zero, 52) == expected);
  CHECK(bits_to_double(expected) == std::numeric_limits<double>::min());
  CHECK(bits_to_double(expected) == std::ldexp(1.0, -1022));
}

TEST_CASE("involution and exactly-one-bit difference on random pairs") {
  std::mt19937_64 gen(12345);
  std::uniform_int_distribution<int> bit_dist(0, 63);
  for (int i = 0; i < 10000; ++i) {
    uint64_t x = gen();
    int b = bit_dist(gen);
    uint64_t y = apply_bitflip(x, b);
    CHECK(std::popcount(x ^ y) == 1);
    CHECK(((x ^ y) >> b) == 1);  // the differing bit is b
    CHECK(apply_bitflip(y, b) == x);
  }
}

TEST_CASE("NaN payloads pass through unchanged") {
  uint64_t quiet_nan = make_bits(0, 0x7FF, 0x8000DEADBEEFull);
  uint64_t flipped = apply_bitflip(quiet_nan, 3);
  CHECK(flipped == (quiet_nan ^ (1ull << 3)));
  // round-tripping through double must not canonicalize the payload
  CHECK(double_to_bits(bits_to_double(quiet_nan)) == quiet_nan);
}

TEST_CASE("bit index out of range throws") {
  CHECK_THROWS_AS(apply_bitflip(0, -1), std::invalid_argument);
  CHECK_THROWS_AS(apply_bitflip(0, 64), std::invalid_argument);
}
