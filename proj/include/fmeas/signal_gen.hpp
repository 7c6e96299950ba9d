#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fmeas/fixed_point.hpp"

namespace fmeas {

enum class EnvelopeKind { gaussian, triangular };

// Pulsed modulated stimulus: within each pulse period the active region is
// envelope(t) * dc * (1 + V*cos(2*pi*carrier*t)), zero in the inter-pulse gap.
// Output is in unit-full-scale volts (rails at +-1); a fraction of exactly 1
// puts the waveform peak one 12-bit LSB below the positive rail so it does
// not clip a 12-bit quantizer.
struct StimulusConfig {
  double carrier_freq_hz = 2.0e9;
  double repetition_rate_hz = 22.0e6;
  double sample_rate_hz = 10.0e9;
  EnvelopeKind envelope = EnvelopeKind::gaussian;
  double envelope_param_s = 6.0e-9;  // gaussian sigma; triangle base width (<=0: active_len wide)
  int active_len = 440;              // envelope support in samples
  double visibility = 1.0;
  double dc_level = 1.0;
  double amplitude_fullscale_fraction = 1.0;
  std::optional<double> snr_db{};  // nullopt: noiseless
  int n_pulses = 100;
  std::uint64_t seed = 1;

  int period_samples() const;
  double resolved_envelope_param() const;
  void validate() const;
};

double gaussian_curve(double t, double sigma);     // unit-area density
double gaussian_spectrum(double w, double sigma);  // its Fourier transform

// Unit-peak envelope over [0, active_len).
std::vector<double> envelope_shape(const StimulusConfig& cfg);

// n_pulses consecutive pulse periods; deterministic (noise is a separate stage).
std::vector<double> generate_stimulus(const StimulusConfig& cfg);

// White gaussian noise with power set against the signal power measured over
// the active (nonzero) samples only. Deterministic per seed.
std::vector<double> add_awgn(std::span<const double> signal, double snr_db, std::uint64_t seed);

// Applies cfg.snr_db if set, otherwise returns the signal unchanged.
std::vector<double> apply_noise(const StimulusConfig& cfg, std::vector<double> signal);

struct QuantizedSignal {
  std::vector<std::int16_t> samples;
  std::size_t clipped = 0;  // values beyond the representable range before saturation
};

// Round-to-nearest quantizer mapping [-fullscale/2, +fullscale/2] onto the
// full code range of fmt; out-of-range values saturate and are counted.
QuantizedSignal quantize(std::span<const double> signal, const FixedPointFormat& fmt,
                         double fullscale);

}  // namespace fmeas
