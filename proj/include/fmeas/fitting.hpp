#pragma once

#include <cstdint>

#include "fmeas/spectral.hpp"

namespace fmeas {

// 3-point parabolic vertex. `legacy_compat` keeps an extra -2*y0 term in the
// numerator (and drops the 1/2) for comparison studies; it is biased even on
// symmetric triples.
enum class VertexFormula { standard, legacy_compat };

struct VertexFit {
  double x_c = 0.0;
  bool degenerate = false;  // collinear points, returned x_c == x0
  bool clamped = false;     // correction exceeded +-0.5 bin and was clamped
};

VertexFit fit_vertex(const SpectralPeak& peak, VertexFormula formula = VertexFormula::standard);

// S16,4 bin index: round to the nearest 1/16 bin, saturating.
std::int16_t quantize_index(double x_c, bool* saturated = nullptr);

double index_to_freq(double x_c, double sample_rate_hz, int n);

struct FrequencyEstimate {
  std::int64_t frame_index = 0;
  std::int16_t x_c_raw = 0;  // S16,4 code (bin units * 16)
  double x_c = 0.0;          // unquantized fitted bin index
  double freq_hz = 0.0;      // from the quantized index, as the hardware multiplier sees it
  bool edge_clamped = false;
  bool flat_spectrum = false;
  bool denominator_degenerate = false;
  bool low_confidence = false;
};

FrequencyEstimate estimate(const SpectralPeak& peak, double sample_rate_hz, int n,
                           VertexFormula formula = VertexFormula::standard);

}  // namespace fmeas
