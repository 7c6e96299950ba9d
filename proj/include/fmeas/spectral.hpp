#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "fmeas/framing.hpp"

namespace fmeas {

// Radix-2 fixed-point FFT configuration. Input samples of input_bits enter
// the data_bits-wide path left-aligned (gain 2^(data_bits-input_bits)); each
// stage right-shifts per the schedule (default one shift per stage, 1/N
// overall), which keeps every intermediate modulus below max|input|.
struct FftConfig {
  int n = 512;
  int data_bits = 16;
  int twiddle_bits = 16;
  int input_bits = 12;
  std::vector<int> scaling_schedule{};  // empty: shift 1 at every stage
  enum class Rounding { truncate, round_half_up };
  Rounding rounding = Rounding::round_half_up;
  int peak_search_min = 2;  // pipeline default; bins below carry the DC skirt

  int stages() const;
  int total_shift() const;
  int input_gain_log2() const { return data_bits - input_bits; }
  std::vector<int> schedule() const;
  void validate() const;
};

struct FixedComplex {
  std::int32_t re = 0;
  std::int32_t im = 0;
};

class FixedFft {
 public:
  explicit FixedFft(FftConfig cfg);

  // Natural-order bins; throws std::overflow_error if a value leaves the
  // data_bits range (impossible under the default schedule).
  std::vector<FixedComplex> transform(std::span<const std::int16_t> frame) const;

  const FftConfig& config() const { return cfg_; }
  // Multiply outputs by this to approximate the DFT of the gained input.
  double output_scale() const;

 private:
  FftConfig cfg_;
  std::vector<int> bitrev_;
  std::vector<std::int32_t> tw_re_, tw_im_;
  std::vector<int> sched_;
};

std::vector<FixedComplex> fft_fixed(std::span<const std::int16_t> frame, const FftConfig& cfg);

// Direct-summation DFT, the verification oracle.
std::vector<std::complex<double>> dft_oracle(std::span<const double> frame);
std::vector<std::complex<double>> dft_oracle(std::span<const std::int16_t> frame);

double magnitude(double re, double im);
std::vector<double> magnitude_spectrum(std::span<const FixedComplex> bins, int count);

struct SpectralPeak {
  int x0 = 0;
  double y_m1 = 0.0, y0 = 0.0, y_p1 = 0.0;
  std::int64_t frame_index = 0;
  bool flat = false;            // all compared magnitudes equal
  bool low_confidence = false;  // flat, or the found bin is not a local maximum
};

// Sequential scan over [search_min, n/2-2], first occurrence wins ties;
// comparisons use fixed-point keys as a hardware comparator would.
SpectralPeak peak_detect(std::span<const double> magnitudes, int search_min = 1);

SpectralPeak analyze_frame(const SampleFrame& frame, const FixedFft& fft);

}  // namespace fmeas
