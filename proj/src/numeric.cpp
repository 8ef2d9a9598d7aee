#include "irsmith/numeric.hpp"

#include <cmath>

namespace irsmith {

double half_to_double(std::uint16_t bits) {
  const bool negative = bits & 0x8000;
  const unsigned exp = (bits >> 10) & 0x1F;
  const unsigned mant = bits & 0x3FF;
  double value;
  if (exp == 0) {
    value = std::ldexp(static_cast<double>(mant), -24);
  } else if (exp == 0x1F) {
    if (mant == 0) {
      value = INFINITY;
    } else {
      // Carry the half payload into the top of the double mantissa.
      std::uint64_t d = 0x7FF0000000000000ULL | (std::uint64_t{mant} << 42);
      value = std::bit_cast<double>(d);
    }
  } else {
    value = std::ldexp(static_cast<double>(mant | 0x400), static_cast<int>(exp) - 25);
  }
  return negative ? -value : value;
}

std::uint16_t double_to_half(double value) {
  const std::uint64_t d = std::bit_cast<std::uint64_t>(value);
  const std::uint16_t sign = static_cast<std::uint16_t>((d >> 48) & 0x8000);
  const int exp = static_cast<int>((d >> 52) & 0x7FF);
  const std::uint64_t mant = d & 0xFFFFFFFFFFFFFULL;

  if (exp == 0x7FF) {
    if (mant == 0) return sign | 0x7C00;
    return sign | 0x7E00 | static_cast<std::uint16_t>((mant >> 42) & 0x1FF);
  }
  if (exp == 0) return sign;  // double subnormals are far below half range

  const int e = exp - 1023;
  if (e > 15) return sign | 0x7C00;

  auto round_shift = [](std::uint64_t v, int shift) -> std::uint64_t {
    if (shift >= 64) return 0;
    std::uint64_t kept = v >> shift;
    std::uint64_t rem = v & ((std::uint64_t{1} << shift) - 1);
    std::uint64_t half = std::uint64_t{1} << (shift - 1);
    if (rem > half || (rem == half && (kept & 1))) ++kept;
    return kept;
  };

  if (e >= -14) {
    std::uint64_t m = round_shift(mant, 42);
    int he = e + 15;
    if (m == 0x400) {
      m = 0;
      ++he;
    }
    if (he >= 31) return sign | 0x7C00;
    return sign | static_cast<std::uint16_t>((he << 10) | m);
  }
  // Subnormal half: units of 2^-24.
  const std::uint64_t full = mant | (std::uint64_t{1} << 52);
  const int shift = 28 - e;
  return sign | static_cast<std::uint16_t>(round_shift(full, shift));
}

std::uint64_t float_to_bits(double value, unsigned width) {
  switch (width) {
    case 16:
      return double_to_half(value);
    case 32:
      return std::bit_cast<std::uint32_t>(static_cast<float>(value));
    default:
      return std::bit_cast<std::uint64_t>(value);
  }
}

double bits_to_float(std::uint64_t bits, unsigned width) {
  switch (width) {
    case 16:
      return half_to_double(static_cast<std::uint16_t>(bits));
    case 32:
      return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(bits)));
    default:
      return std::bit_cast<double>(bits);
  }
}

}  // namespace irsmith
