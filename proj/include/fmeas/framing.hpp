#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fmeas/parallel.hpp"

namespace fmeas {

// One pulse period of quantized samples. After pad_frame, samples.size() is
// the FFT length and samples[active_len..] are zero.
struct SampleFrame {
  std::vector<std::int16_t> samples;
  int active_len = 0;
  std::int64_t frame_index = 0;
  bool padded = false;
};

struct PeriodOptions {
  int min_lag = 2;
  int max_lag = 4096;          // clamped to signal_len/3
  double threshold = 0.5;      // below -> "period not found"
  Exec exec = Exec::serial;
};

// Lag of the maximum normalized autocorrelation above min_lag, with a
// divisor refinement so multiples of the fundamental are not returned.
int estimate_period(std::span<const std::int16_t> signal, const PeriodOptions& opt = {});

struct SplitOptions {
  double gap_search_frac = 0.05;  // +- window around nominal boundaries, fraction of period
  int energy_window = 8;          // moving-average |x| width for the cut criterion
};

struct SplitResult {
  std::vector<SampleFrame> frames;
  bool period_exceeds_signal = false;
};

// Cut the signal once per period at the minimum-energy sample near each
// nominal boundary. Every input sample lands in exactly one frame.
SplitResult split_frames(std::span<const std::int16_t> signal, int period,
                         const SplitOptions& opt = {});

// Appends zeros up to target_len. active_len is unchanged.
SampleFrame pad_frame(const SampleFrame& frame, int target_len = 512);

}  // namespace fmeas
