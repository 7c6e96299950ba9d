#include "fmeas/signal_gen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fmeas {

namespace {
// A full-scale stimulus peaks one 12-bit LSB below the rail (fraction 1.0
// quantizes to code 2047, not a saturated 2048).
constexpr double kFullScalePeak = 2047.0 / 2048.0;
}  // namespace

int StimulusConfig::period_samples() const {
  return int(std::llround(sample_rate_hz / repetition_rate_hz));
}

double StimulusConfig::resolved_envelope_param() const {
  if (envelope_param_s > 0.0) return envelope_param_s;
  return double(active_len) / sample_rate_hz;  // triangle spanning the active region
}

void StimulusConfig::validate() const {
  if (sample_rate_hz <= 0) throw std::invalid_argument("stimulus: sample_rate must be > 0");
  if (carrier_freq_hz < 0 || carrier_freq_hz >= sample_rate_hz / 2)
    throw std::invalid_argument("stimulus: carrier must satisfy 0 <= f < sample_rate/2");
  if (repetition_rate_hz <= 0 || repetition_rate_hz >= sample_rate_hz)
    throw std::invalid_argument("stimulus: repetition_rate must be in (0, sample_rate)");
  if (active_len < 1) throw std::invalid_argument("stimulus: active_len must be >= 1");
  if (period_samples() < active_len)
    throw std::invalid_argument("stimulus: pulse period shorter than active length");
  if (!(visibility > 0.0 && visibility <= 1.0))
    throw std::invalid_argument("stimulus: visibility must be in (0,1]");
  if (!(amplitude_fullscale_fraction > 0.0 && amplitude_fullscale_fraction <= 1.0))
    throw std::invalid_argument("stimulus: amplitude fraction must be in (0,1]");
  if (dc_level <= 0) throw std::invalid_argument("stimulus: dc_level must be > 0");
  if (n_pulses < 0) throw std::invalid_argument("stimulus: n_pulses must be >= 0");
  if (resolved_envelope_param() <= 0)
    throw std::invalid_argument("stimulus: envelope parameter must be > 0");
}

double gaussian_curve(double t, double sigma) {
  if (sigma <= 0) throw std::domain_error("gaussian_curve: sigma must be > 0");
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  return norm * std::exp(-(t * t) / (2.0 * sigma * sigma));
}

double gaussian_spectrum(double w, double sigma) {
  if (sigma <= 0) throw std::domain_error("gaussian_spectrum: sigma must be > 0");
  const double sw = sigma * w;
  return std::exp(-(sw * sw) / 2.0);
}

std::vector<double> envelope_shape(const StimulusConfig& cfg) {
  const int n = cfg.active_len;
  const double center = (n - 1) / 2.0;
  const double param = cfg.resolved_envelope_param();
  std::vector<double> env(n);
  if (cfg.envelope == EnvelopeKind::gaussian) {
    for (int i = 0; i < n; ++i) {
      const double t = (i - center) / cfg.sample_rate_hz;
      env[i] = std::exp(-(t * t) / (2.0 * param * param));
    }
  } else {
    const double half = param * cfg.sample_rate_hz / 2.0;  // base width in samples / 2
    for (int i = 0; i < n; ++i) {
      const double v = 1.0 - std::abs(i - center) / half;
      env[i] = v > 0.0 ? v : 0.0;
    }
  }
  return env;
}

std::vector<double> generate_stimulus(const StimulusConfig& cfg) {
  cfg.validate();
  const int period = cfg.period_samples();
  const std::vector<double> env = envelope_shape(cfg);

  // One pulse, carrier phase local to the pulse: the train is exactly periodic.
  std::vector<double> pulse(cfg.active_len);
  const double w = 2.0 * std::numbers::pi * cfg.carrier_freq_hz / cfg.sample_rate_hz;
  const double gain = cfg.amplitude_fullscale_fraction * kFullScalePeak /
                      (cfg.dc_level * (1.0 + cfg.visibility));
  for (int i = 0; i < cfg.active_len; ++i) {
    pulse[i] = env[i] * cfg.dc_level * (1.0 + cfg.visibility * std::cos(w * i)) * gain;
  }

  std::vector<double> signal(std::size_t(cfg.n_pulses) * period, 0.0);
  for (int p = 0; p < cfg.n_pulses; ++p) {
    std::copy(pulse.begin(), pulse.end(), signal.begin() + std::size_t(p) * period);
  }
  return signal;
}

std::vector<double> add_awgn(std::span<const double> signal, double snr_db, std::uint64_t seed) {
  if (signal.empty() || !std::isfinite(snr_db))
    throw std::invalid_argument("add_awgn: empty signal or non-finite snr");
  double power = 0.0;
  std::size_t active = 0;
  for (double v : signal) {
    if (v != 0.0) {
      power += v * v;
      ++active;
    }
  }
  if (active == 0) throw std::invalid_argument("add_awgn: all-zero signal, SNR undefined");
  power /= double(active);

  const double noise_sd = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_sd);
  std::vector<double> out(signal.begin(), signal.end());
  for (double& v : out) v += dist(rng);
  return out;
}

std::vector<double> apply_noise(const StimulusConfig& cfg, std::vector<double> signal) {
  if (!cfg.snr_db) return signal;
  return add_awgn(signal, *cfg.snr_db, cfg.seed);
}

QuantizedSignal quantize(std::span<const double> signal, const FixedPointFormat& fmt,
                         double fullscale) {
  fmt.validate();
  if (fullscale <= 0) throw std::invalid_argument("quantize: fullscale must be > 0");
  if (fmt.wordlength > 16) throw std::invalid_argument("quantize: wordlength > 16 unsupported");

  const double scale = std::ldexp(1.0, fmt.wordlength - 1) / (fullscale / 2.0);
  QuantizedSignal out;
  out.samples.resize(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const std::int64_t raw = std::llround(signal[i] * scale);
    std::int64_t code = raw;
    if (code > fmt.max_code()) {
      code = fmt.max_code();
      ++out.clipped;
    } else if (code < fmt.min_code()) {
      code = fmt.min_code();
      ++out.clipped;
    }
    out.samples[i] = std::int16_t(code);
  }
  return out;
}

}  // namespace fmeas
