#include "fmeas/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fmeas/fixed_point.hpp"

namespace fmeas {

VertexFit fit_vertex(const SpectralPeak& peak, VertexFormula formula) {
  VertexFit fit;
  const double x0 = double(peak.x0);
  const double den = peak.y_m1 - 2.0 * peak.y0 + peak.y_p1;
  if (den == 0.0) {
    fit.x_c = x0;
    fit.degenerate = true;
    return fit;
  }
  double delta;
  if (formula == VertexFormula::standard) {
    delta = (peak.y_m1 - peak.y_p1) / (2.0 * den);
  } else {
    delta = -(peak.y_p1 - peak.y_m1 - 2.0 * peak.y0) / (peak.y_p1 + peak.y_m1 - 2.0 * peak.y0);
  }
  // the vertex of a true local maximum lies between the neighbors
  if (delta > 0.5 || delta < -0.5) {
    delta = std::clamp(delta, -0.5, 0.5);
    fit.clamped = true;
  }
  fit.x_c = x0 + delta;
  return fit;
}

std::int16_t quantize_index(double x_c, bool* saturated) {
  return std::int16_t(kResultFormat.quantize_code(x_c, saturated));
}

double index_to_freq(double x_c, double sample_rate_hz, int n) {
  if (n <= 0) throw std::invalid_argument("index_to_freq: n must be > 0");
  return x_c * sample_rate_hz / n;
}

FrequencyEstimate estimate(const SpectralPeak& peak, double sample_rate_hz, int n,
                           VertexFormula formula) {
  const VertexFit fit = fit_vertex(peak, formula);
  bool saturated = false;
  const std::int16_t raw = quantize_index(fit.x_c, &saturated);

  FrequencyEstimate est;
  est.frame_index = peak.frame_index;
  est.x_c_raw = raw;
  est.x_c = fit.x_c;
  est.freq_hz = index_to_freq(double(raw) / 16.0, sample_rate_hz, n);
  est.edge_clamped = fit.clamped || saturated;
  est.flat_spectrum = peak.flat;
  est.denominator_degenerate = fit.degenerate;
  est.low_confidence = peak.low_confidence;
  return est;
}

}  // namespace fmeas
