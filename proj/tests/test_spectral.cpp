#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fmeas/framing.hpp"
#include "fmeas/signal_gen.hpp"
#include "fmeas/spectral.hpp"

using namespace fmeas;

namespace {

std::vector<std::int16_t> random_frame(std::mt19937_64& rng, int lo = -2048, int hi = 2047) {
  std::uniform_int_distribution<int> dist(lo, hi);
  std::vector<std::int16_t> frame(512);
  for (auto& v : frame) v = std::int16_t(dist(rng));
  return frame;
}

// max |fixed * 2^shifts - oracle(gained input)| over bins, relative to the
// oracle peak
double oracle_error_ratio(const FixedFft& fft, std::span<const std::int16_t> frame) {
  const auto fixed = fft.transform(frame);
  std::vector<double> gained(frame.size());
  const double g = std::ldexp(1.0, fft.config().input_gain_log2());
  for (std::size_t i = 0; i < frame.size(); ++i) gained[i] = double(frame[i]) * g;
  const auto oracle = dft_oracle(std::span<const double>(gained));
  const double scale = fft.output_scale();
  double max_err = 0.0, max_mag = 0.0;
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    const std::complex<double> rescaled(fixed[k].re * scale, fixed[k].im * scale);
    max_err = std::max(max_err, std::abs(rescaled - oracle[k]));
    max_mag = std::max(max_mag, std::abs(oracle[k]));
  }
  return max_err / max_mag;
}

}  // namespace

TEST_CASE("zero frame transforms to zero") {
  const FixedFft fft{FftConfig{}};
  std::vector<std::int16_t> frame(512, 0);
  for (const auto& bin : fft.transform(frame)) {
    CHECK(bin.re == 0);
    CHECK(bin.im == 0);
  }
}

TEST_CASE("impulse spreads evenly across all bins") {
  const FixedFft fft{FftConfig{}};
  std::vector<std::int16_t> frame(512, 0);
  frame[0] = 1000;
  const auto bins = fft.transform(frame);
  // A * 2^4 / 512 = 31.25 under the default schedule
  for (const auto& bin : bins) {
    CHECK(std::abs(double(bin.re) - 31.25) <= 1.0);
    CHECK(bin.im == 0);
  }
  CHECK(bins[0].re == 32);  // round-half-up halving chain

  FftConfig trunc;
  trunc.rounding = FftConfig::Rounding::truncate;
  const auto tbins = FixedFft{trunc}.transform(frame);
  CHECK(tbins[0].re == 31);  // truncating chain floors instead
}

TEST_CASE("fixed-point transform tracks the oracle within 2^-8") {
  std::mt19937_64 rng(17);
  const FixedFft fft{FftConfig{}};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i)
    worst = std::max(worst, oracle_error_ratio(fft, random_frame(rng)));
  CHECK(worst <= std::ldexp(1.0, -8));
}

TEST_CASE("transform without scaling overflows and reports it") {
  FftConfig cfg;
  cfg.scaling_schedule.assign(9, 0);
  std::vector<std::int16_t> frame(512, 2047);
  CHECK_THROWS_AS(FixedFft{cfg}.transform(frame), std::overflow_error);
}

TEST_CASE("schedule and input validation") {
  FftConfig cfg;
  cfg.scaling_schedule = {1, 1, 1};  // wrong length for n=512
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  const FixedFft fft{FftConfig{}};
  std::vector<std::int16_t> small(256, 0);
  CHECK_THROWS_AS(fft.transform(small), std::invalid_argument);
  std::vector<std::int16_t> wide(512, 0);
  wide[3] = 3000;  // outside S12
  CHECK_THROWS_AS(fft.transform(wide), std::invalid_argument);
}

TEST_CASE("oracle impulse and single-tone responses") {
  std::vector<double> frame(512, 0.0);
  frame[0] = 3.5;
  for (const auto& bin : dft_oracle(std::span<const double>(frame)))
    CHECK(std::abs(bin - std::complex<double>(3.5, 0.0)) < 1e-12);

  const int k0 = 37;
  for (int i = 0; i < 512; ++i)
    frame[std::size_t(i)] = std::cos(2.0 * std::numbers::pi * k0 * i / 512.0);
  const auto bins = dft_oracle(std::span<const double>(frame));
  CHECK(std::abs(bins[k0] - std::complex<double>(256.0, 0.0)) < 1e-9 * 256.0);
  CHECK(std::abs(bins[512 - k0] - std::complex<double>(256.0, 0.0)) < 1e-9 * 256.0);
  for (int k = 0; k < 512; ++k) {
    if (k == k0 || k == 512 - k0) continue;
    CHECK(std::abs(bins[std::size_t(k)]) < 1e-9 * 512.0);
  }
}

TEST_CASE("oracle satisfies Parseval") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const auto frame = random_frame(rng);
    const auto bins = dft_oracle(std::span<const std::int16_t>(frame));
    double time_energy = 0.0, freq_energy = 0.0;
    for (auto v : frame) time_energy += double(v) * double(v);
    for (const auto& b : bins) freq_energy += std::norm(b);
    CHECK(std::abs(freq_energy / 512.0 - time_energy) < 1e-9 * time_energy);
  }
}

TEST_CASE("magnitude basics and long-double oracle") {
  CHECK(magnitude(3.0, 4.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(magnitude(0.0, 0.0) == 0.0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-3e4, 3e4);
  for (int i = 0; i < 10000; ++i) {
    const double re = dist(rng), im = dist(rng);
    const long double ref = std::hypot(static_cast<long double>(re),
                                       static_cast<long double>(im));
    CHECK(std::abs(magnitude(re, im) - double(ref)) <= 1e-12 * double(ref) + 1e-12);
  }
}

TEST_CASE("peak detection captures the neighbors") {
  std::vector<double> mags(256, 0.1);
  mags[101] = 0.6;
  mags[102] = 1.0;
  mags[103] = 0.4;
  const auto p = peak_detect(mags);
  CHECK(p.x0 == 102);
  CHECK(p.y_m1 == 0.6);
  CHECK(p.y0 == 1.0);
  CHECK(p.y_p1 == 0.4);
  CHECK_FALSE(p.flat);
  CHECK_FALSE(p.low_confidence);
}

TEST_CASE("strictly decreasing magnitudes put the peak at the first searched bin") {
  std::vector<double> mags(256);
  for (int k = 0; k < 256; ++k) mags[std::size_t(k)] = 256.0 - k;
  CHECK(peak_detect(mags).x0 == 1);   // DC excluded by the default search floor
  CHECK(peak_detect(mags, 2).x0 == 2);
}

TEST_CASE("ties resolve to the first occurrence") {
  std::vector<double> mags(256, 1.0);
  mags[50] = 9.0;
  mags[60] = 9.0;
  CHECK(peak_detect(mags).x0 == 50);
}

TEST_CASE("flat spectra are flagged") {
  std::vector<double> mags(256, 2.0);
  const auto p = peak_detect(mags);
  CHECK(p.x0 == 1);
  CHECK(p.flat);
  CHECK(p.low_confidence);
}

TEST_CASE("peak choice is invariant under positive scaling") {
  std::vector<double> mags(256);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(1.0, 100.0);
  for (auto& m : mags) m = dist(rng);
  const int ref = peak_detect(mags).x0;
  for (double c : {2.0, 3.7, 1000.0}) {
    auto scaled = mags;
    for (auto& m : scaled) m *= c;
    CHECK(peak_detect(scaled).x0 == ref);
  }
}

TEST_CASE("analyzing a clean 2 GHz frame finds bin 102") {
  StimulusConfig cfg;
  cfg.n_pulses = 1;
  const auto q = quantize(generate_stimulus(cfg), kAdcFormat, 2.0);
  SampleFrame frame;
  frame.samples.assign(q.samples.begin(), q.samples.begin() + 455);
  frame.active_len = 455;
  const auto padded = pad_frame(frame, 512);

  const FixedFft fft{FftConfig{}};
  const auto peak = analyze_frame(padded, fft);
  CHECK(peak.x0 == 102);
  CHECK_FALSE(peak.low_confidence);

  // same frame through the double-precision oracle
  const auto bins = dft_oracle(std::span<const std::int16_t>(padded.samples));
  int oracle_best = 2;
  for (int k = 3; k < 255; ++k)
    if (std::abs(bins[std::size_t(k)]) > std::abs(bins[std::size_t(oracle_best)])) oracle_best = k;
  CHECK(oracle_best == peak.x0);
}

TEST_CASE("modulation-free stimulus yields a low-confidence peak") {
  StimulusConfig cfg;
  cfg.visibility = 1e-12;
  cfg.n_pulses = 1;
  const auto q = quantize(generate_stimulus(cfg), kAdcFormat, 2.0);
  SampleFrame frame;
  frame.samples.assign(q.samples.begin(), q.samples.begin() + 455);
  frame.active_len = 455;
  const auto peak = analyze_frame(pad_frame(frame, 512), FixedFft{FftConfig{}});
  CHECK(peak.low_confidence);  // only the DC skirt remains in the search range
}

TEST_CASE("frame analysis does not depend on processing order") {
  StimulusConfig cfg;
  cfg.n_pulses = 48;
  cfg.snr_db = 30.0;
  const auto q = quantize(apply_noise(cfg, generate_stimulus(cfg)), kAdcFormat, 2.0);
  auto split = split_frames(q.samples, 455);
  std::vector<SampleFrame> padded;
  for (auto& f : split.frames)
    if (f.active_len >= 440) padded.push_back(pad_frame(f, 512));

  const FixedFft fft{FftConfig{}};
  std::vector<SpectralPeak> forward, reverse(padded.size());
  for (const auto& f : padded) forward.push_back(analyze_frame(f, fft));
  for (std::size_t i = padded.size(); i-- > 0;) reverse[i] = analyze_frame(padded[i], fft);
  REQUIRE(forward.size() == reverse.size());
  for (std::size_t i = 0; i < forward.size(); ++i) {
    CHECK(forward[i].x0 == reverse[i].x0);
    CHECK(forward[i].y0 == reverse[i].y0);
  }
}

TEST_CASE("transform is nearly linear at the rounding scale") {
  std::mt19937_64 rng(41);
  const FixedFft fft{FftConfig{}};
  std::int64_t worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_frame(rng, -1024, 1023);
    const auto b = random_frame(rng, -1024, 1023);
    std::vector<std::int16_t> sum(512);
    for (int i = 0; i < 512; ++i) sum[std::size_t(i)] = std::int16_t(a[std::size_t(i)] + b[std::size_t(i)]);
    const auto fa = fft.transform(a);
    const auto fb = fft.transform(b);
    const auto fs = fft.transform(sum);
    for (int k = 0; k < 512; ++k) {
      worst = std::max(worst, std::abs(std::int64_t(fs[std::size_t(k)].re) - fa[std::size_t(k)].re - fb[std::size_t(k)].re));
      worst = std::max(worst, std::abs(std::int64_t(fs[std::size_t(k)].im) - fa[std::size_t(k)].im - fb[std::size_t(k)].im));
    }
  }
  // per-stage rounding deltas compound; 4 LSB observed, 6 leaves headroom
  CHECK(worst <= 6);
}
