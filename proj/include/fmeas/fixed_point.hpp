#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fmeas {

// Signed/unsigned fixed-point format "S<w>,<f>": values are code * 2^-f.
struct FixedPointFormat {
  bool is_signed = true;
  int wordlength = 16;
  int fraction_bits = 0;

  void validate() const {
    if (wordlength < 1 || wordlength > 32)
      throw std::invalid_argument("FixedPointFormat: wordlength out of [1,32]");
    if (fraction_bits < 0 || fraction_bits >= wordlength)
      throw std::invalid_argument("FixedPointFormat: fraction_bits out of [0,wordlength)");
  }

  std::int64_t max_code() const {
    return is_signed ? (std::int64_t(1) << (wordlength - 1)) - 1
                     : (std::int64_t(1) << wordlength) - 1;
  }
  std::int64_t min_code() const {
    return is_signed ? -(std::int64_t(1) << (wordlength - 1)) : 0;
  }

  double lsb() const { return std::ldexp(1.0, -fraction_bits); }
  double max_value() const { return double(max_code()) * lsb(); }
  double min_value() const { return double(min_code()) * lsb(); }
  double value_of(std::int64_t code) const { return double(code) * lsb(); }

  // Round to nearest representable code, saturating at the format bounds.
  std::int64_t quantize_code(double value, bool* clipped = nullptr) const {
    const std::int64_t raw = std::llround(value / lsb());
    if (clipped) *clipped = raw > max_code() || raw < min_code();
    if (raw > max_code()) return max_code();
    if (raw < min_code()) return min_code();
    return raw;
  }
};

inline constexpr FixedPointFormat kAdcFormat{true, 12, 0};     // S12,0 sample codes
inline constexpr FixedPointFormat kResultFormat{true, 16, 4};  // S16,4 fitted index

}  // namespace fmeas
