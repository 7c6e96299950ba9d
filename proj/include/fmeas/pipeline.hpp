#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fmeas/distributor.hpp"
#include "fmeas/fitting.hpp"
#include "fmeas/framing.hpp"
#include "fmeas/parallel.hpp"
#include "fmeas/signal_gen.hpp"
#include "fmeas/spectral.hpp"

namespace fmeas {

// Full measurement chain: stimulus -> quantize -> frame split -> lane
// distribution -> per-lane FFT + peak -> parabolic fit, merged in frame order.
struct PipelineConfig {
  StimulusConfig stimulus{};
  FftConfig fft{};
  P2SConfig p2s{};
  FixedPointFormat adc_format = kAdcFormat;
  double fullscale_volts = 2.0;  // rails at +-1 V
  VertexFormula vertex = VertexFormula::standard;
  int min_frame_len = 440;  // shorter split frames are dropped, counted
  bool estimate_period_from_signal = true;

  void validate() const;
};

struct PipelineStats {
  int period = 0;
  std::size_t frames_split = 0;
  std::size_t frames_dropped = 0;
  std::size_t clipped_samples = 0;
};

struct PipelineResult {
  std::vector<FrequencyEstimate> estimates;
  PipelineStats stats;
};

PipelineResult run_pipeline(const PipelineConfig& cfg, Exec exec = Exec::serial);

struct PointStats {
  double true_freq_hz = 0.0;
  double mean_est_hz = 0.0;
  double max_deviation_hz = 0.0;
  double range_hz = 0.0;  // max - min of the per-frame estimates
  int n_frames = 0;
};

struct ExperimentResult {
  std::string label;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string timestamp;
  double sample_rate_hz = 0.0;
  int fft_n = 0;
  std::vector<PointStats> points;

  double max_deviation_hz() const;
  double max_range_hz() const;
};

struct SweepConfig {
  double f_start_hz = 100e6;
  double f_stop_hz = 4e9;
  double f_step_hz = 10e6;
  int frames_per_point = 50;
  std::optional<double> snr_db{};
  double amplitude_fraction = 1.0;
  std::uint64_t seed = 1;
  PipelineConfig base{};

  int n_points() const;
  void validate() const;
};

// Per-point randomness derives from (seed, point index): parallel and serial
// sweeps agree bit for bit.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

ExperimentResult sweep(const SweepConfig& cfg, Exec exec = Exec::openmp);

struct CampaignLevel {
  std::string name;
  double value = 0.0;  // dB for SNR campaigns, full-scale fraction for amplitude
  ExperimentResult result;
};

struct CampaignOutcome {
  std::vector<CampaignLevel> levels;
  bool passed = true;
  std::vector<std::string> messages;
};

// Sweeps at each SNR level; asserts range <= 5 MHz everywhere and that the
// range does not shrink as the SNR drops.
CampaignOutcome snr_campaign(const std::vector<double>& levels_db, const SweepConfig& base,
                             Exec exec = Exec::openmp);

// AWG amplitude levels (Vpp) mapped through the attenuator onto full-scale
// fractions; asserts range <= 5 MHz, <= 4 MHz at the lowest level, and a
// non-increasing range as amplitude grows.
CampaignOutcome amplitude_campaign(const std::vector<double>& levels_vpp, double attenuation_db,
                                   const SweepConfig& base, Exec exec = Exec::openmp);

double amplitude_fraction_for_vpp(double vpp, double attenuation_db);

}  // namespace fmeas
