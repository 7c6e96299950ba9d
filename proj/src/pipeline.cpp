#include "fmeas/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fmeas/report.hpp"

namespace fmeas {

void PipelineConfig::validate() const {
  stimulus.validate();
  fft.validate();
  p2s.validate();
  adc_format.validate();
  if (fullscale_volts <= 0) throw std::invalid_argument("pipeline: fullscale must be > 0");
  if (fft.input_bits != adc_format.wordlength)
    throw std::invalid_argument("pipeline: fft.input_bits must match the ADC wordlength");
  // frames can exceed the nominal period by the gap-search window
  const int period = stimulus.period_samples();
  const int max_frame = period + 2 * std::max(1, int(std::llround(0.05 * period)));
  if (max_frame > fft.n)
    throw std::invalid_argument("pipeline: pulse period does not fit the FFT length");
}

PipelineResult run_pipeline(const PipelineConfig& cfg, Exec exec) {
  cfg.validate();
  PipelineResult result;

  std::vector<double> signal = apply_noise(cfg.stimulus, generate_stimulus(cfg.stimulus));
  if (signal.empty()) return result;

  QuantizedSignal q = quantize(signal, cfg.adc_format, cfg.fullscale_volts);
  result.stats.clipped_samples = q.clipped;

  const int nominal = cfg.stimulus.period_samples();
  int period = nominal;
  if (cfg.estimate_period_from_signal && std::int64_t(q.samples.size()) >= 3L * nominal) {
    PeriodOptions opt;
    opt.min_lag = std::max(2, nominal / 2);
    opt.max_lag = nominal * 5 / 2;
    opt.exec = exec;
    period = estimate_period(q.samples, opt);
  }

  const SplitOptions split_opt;
  SplitResult split = split_frames(q.samples, period, split_opt);
  result.stats.period = period;
  result.stats.frames_split = split.frames.size();

  // Cut points wander the gap-search window, so a full frame can be up to
  // 2*window shorter than the period; only genuinely partial frames
  // (trailing fragments) fall below that.
  const int window = std::max<int>(1, int(std::llround(split_opt.gap_search_frac * period)));
  const int min_len = std::min(cfg.min_frame_len, period - 2 * window - 2);

  std::vector<SampleFrame> frames;
  frames.reserve(split.frames.size());
  for (auto& f : split.frames) {
    if (f.active_len < min_len) {
      ++result.stats.frames_dropped;
      continue;
    }
    frames.push_back(pad_frame(f, cfg.fft.n));
  }
  if (frames.empty()) return result;

  const auto lanes = distribute(std::move(frames), cfg.p2s);
  const FixedFft fft(cfg.fft);
  const double fs = cfg.stimulus.sample_rate_hz;

  std::vector<std::vector<FrequencyEstimate>> per_lane(lanes.size());
  parallel_for(std::int64_t(lanes.size()), exec, [&](std::int64_t lane) {
    auto& out = per_lane[std::size_t(lane)];
    out.reserve(lanes[std::size_t(lane)].size());
    for (const SampleFrame& frame : lanes[std::size_t(lane)]) {
      const SpectralPeak peak = analyze_frame(frame, fft);
      out.push_back(estimate(peak, fs, cfg.fft.n, cfg.vertex));
    }
  });

  for (const auto& lane : per_lane)
    result.estimates.insert(result.estimates.end(), lane.begin(), lane.end());
  std::sort(result.estimates.begin(), result.estimates.end(),
            [](const FrequencyEstimate& a, const FrequencyEstimate& b) {
              return a.frame_index < b.frame_index;
            });
  return result;
}

double ExperimentResult::max_deviation_hz() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, p.max_deviation_hz);
  return m;
}

double ExperimentResult::max_range_hz() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, p.range_hz);
  return m;
}

int SweepConfig::n_points() const {
  if (f_step_hz <= 0) return 0;
  return int(std::floor((f_stop_hz - f_start_hz) / f_step_hz + 1e-9)) + 1;
}

void SweepConfig::validate() const {
  base.validate();
  const double bin = base.stimulus.sample_rate_hz / base.fft.n;
  if (f_step_hz <= 0) throw std::invalid_argument("sweep: step must be > 0");
  if (f_start_hz < 2 * bin)
    throw std::invalid_argument("sweep: start must be >= 2 bin spacings above DC");
  if (f_stop_hz > base.stimulus.sample_rate_hz / 2 - 2 * bin)
    throw std::invalid_argument("sweep: stop must be >= 2 bin spacings below Nyquist");
  if (f_stop_hz < f_start_hz) throw std::invalid_argument("sweep: stop < start");
  if (frames_per_point < 1) throw std::invalid_argument("sweep: frames_per_point must be >= 1");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

PointStats stats_for_point(const SweepConfig& cfg, int index, Exec inner_exec) {
  PipelineConfig pc = cfg.base;
  pc.stimulus.carrier_freq_hz = cfg.f_start_hz + double(index) * cfg.f_step_hz;
  pc.stimulus.n_pulses = cfg.frames_per_point + 2;
  pc.stimulus.snr_db = cfg.snr_db;
  pc.stimulus.amplitude_fullscale_fraction = cfg.amplitude_fraction;
  pc.stimulus.seed = mix_seed(cfg.seed, std::uint64_t(index));

  const PipelineResult r = run_pipeline(pc, inner_exec);
  if (int(r.estimates.size()) < cfg.frames_per_point)
    throw std::runtime_error("sweep: fewer frames than requested at point " +
                             std::to_string(index));

  PointStats p;
  p.true_freq_hz = pc.stimulus.carrier_freq_hz;
  p.n_frames = int(r.estimates.size());
  double lo = r.estimates[0].freq_hz, hi = lo, sum = 0.0, dev = 0.0;
  for (const auto& e : r.estimates) {
    lo = std::min(lo, e.freq_hz);
    hi = std::max(hi, e.freq_hz);
    sum += e.freq_hz;
    dev = std::max(dev, std::abs(e.freq_hz - p.true_freq_hz));
  }
  p.mean_est_hz = sum / double(r.estimates.size());
  p.max_deviation_hz = dev;
  p.range_hz = hi - lo;
  return p;
}

}  // namespace

ExperimentResult sweep(const SweepConfig& cfg, Exec exec) {
  cfg.validate();
  ExperimentResult result;
  result.label = "sweep";
  result.seed = cfg.seed;
  result.sample_rate_hz = cfg.base.stimulus.sample_rate_hz;
  result.fft_n = cfg.base.fft.n;
  result.timestamp = iso_timestamp();
  result.config_hash = config_hash_hex(sweep_config_json(cfg));

  result.points.resize(std::size_t(cfg.n_points()));
  // points run in parallel, each pipeline serial inside
  parallel_for(std::int64_t(result.points.size()), exec, [&](std::int64_t i) {
    result.points[std::size_t(i)] = stats_for_point(cfg, int(i), Exec::serial);
  });
  return result;
}

CampaignOutcome snr_campaign(const std::vector<double>& levels_db, const SweepConfig& base,
                             Exec exec) {
  CampaignOutcome out;
  for (double level : levels_db) {
    SweepConfig cfg = base;
    cfg.snr_db = level;
    CampaignLevel cl;
    cl.name = std::to_string(int(level)) + "dB";
    cl.value = level;
    cl.result = sweep(cfg, exec);
    cl.result.label = "snr_" + cl.name;
    out.levels.push_back(std::move(cl));
  }
  for (const auto& cl : out.levels) {
    const double r = cl.result.max_range_hz();
    if (r > 5e6) {
      out.passed = false;
      out.messages.push_back("range " + std::to_string(r / 1e6) + " MHz at " + cl.name +
                             " exceeds 5 MHz");
    }
  }
  // range must not shrink as SNR drops (levels in any order; compare sorted)
  std::vector<CampaignLevel*> by_snr;
  for (auto& cl : out.levels) by_snr.push_back(&cl);
  std::sort(by_snr.begin(), by_snr.end(),
            [](const auto* a, const auto* b) { return a->value > b->value; });
  for (std::size_t i = 1; i < by_snr.size(); ++i) {
    if (by_snr[i]->result.max_range_hz() < by_snr[i - 1]->result.max_range_hz()) {
      out.passed = false;
      out.messages.push_back("range at " + by_snr[i]->name + " is below the range at " +
                             by_snr[i - 1]->name);
    }
  }
  return out;
}

double amplitude_fraction_for_vpp(double vpp, double attenuation_db) {
  // attenuated peak referenced to the +-400 mV converter range
  constexpr double kAdcHalfRangeVolts = 0.4;
  return (vpp / 2.0) / std::pow(10.0, attenuation_db / 20.0) / kAdcHalfRangeVolts;
}

CampaignOutcome amplitude_campaign(const std::vector<double>& levels_vpp, double attenuation_db,
                                   const SweepConfig& base, Exec exec) {
  CampaignOutcome out;
  for (double vpp : levels_vpp) {
    const double fraction = amplitude_fraction_for_vpp(vpp, attenuation_db);
    if (fraction > 1.0) {
      out.passed = false;
      out.messages.push_back("level " + std::to_string(vpp) + " Vpp saturates the converter");
      continue;
    }
    SweepConfig cfg = base;
    cfg.amplitude_fraction = fraction;
    CampaignLevel cl;
    cl.name = std::to_string(vpp) + "Vpp";
    cl.value = fraction;
    cl.result = sweep(cfg, exec);
    cl.result.label = "amplitude_" + cl.name;
    out.levels.push_back(std::move(cl));
  }
  if (out.levels.empty()) {
    out.passed = false;
    return out;
  }
  std::vector<const CampaignLevel*> by_amp;
  for (const auto& cl : out.levels) by_amp.push_back(&cl);
  std::sort(by_amp.begin(), by_amp.end(),
            [](const auto* a, const auto* b) { return a->value < b->value; });
  for (const auto& cl : out.levels) {
    if (cl.result.max_range_hz() > 5e6) {
      out.passed = false;
      out.messages.push_back("range exceeds 5 MHz at " + cl.name);
    }
  }
  if (by_amp.front()->result.max_range_hz() > 4e6) {
    out.passed = false;
    out.messages.push_back("range at the lowest amplitude exceeds 4 MHz");
  }
  for (std::size_t i = 1; i < by_amp.size(); ++i) {
    if (by_amp[i]->result.max_range_hz() > by_amp[i - 1]->result.max_range_hz()) {
      out.passed = false;
      out.messages.push_back("range grows with amplitude between " + by_amp[i - 1]->name +
                             " and " + by_amp[i]->name);
    }
  }
  return out;
}

}  // namespace fmeas
