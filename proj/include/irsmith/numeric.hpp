#pragma once

#include <bit>
#include <cstdint>

namespace irsmith {

constexpr std::uint64_t width_mask(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

/// Sign-extends the low `width` bits of `bits`.
constexpr std::int64_t sign_extend(std::uint64_t bits, unsigned width) {
  if (width >= 64) return static_cast<std::int64_t>(bits);
  std::uint64_t m = std::uint64_t{1} << (width - 1);
  bits &= width_mask(width);
  return static_cast<std::int64_t>((bits ^ m) - m);
}

/// IEEE binary16 <-> binary64, round-to-nearest-even.
double half_to_double(std::uint16_t bits);
std::uint16_t double_to_half(double value);

/// Rounds `value` to a float of `width` bits and returns its bit pattern.
std::uint64_t float_to_bits(double value, unsigned width);
/// Value of a float bit pattern of `width` bits, widened exactly to double.
double bits_to_float(std::uint64_t bits, unsigned width);

}  // namespace irsmith
