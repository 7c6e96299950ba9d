#include "fmeas/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fmeas {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_int(int v) {
  int m = 0;
  while ((1 << m) < v) ++m;
  return m;
}

inline std::int64_t shift_round(std::int64_t v, int s, FftConfig::Rounding mode) {
  if (s <= 0) return v;
  if (mode == FftConfig::Rounding::round_half_up)
    return (v + (std::int64_t(1) << (s - 1))) >> s;
  return v >> s;
}

}  // namespace

int FftConfig::stages() const { return log2_int(n); }

std::vector<int> FftConfig::schedule() const {
  if (!scaling_schedule.empty()) return scaling_schedule;
  return std::vector<int>(std::size_t(stages()), 1);
}

int FftConfig::total_shift() const {
  int sum = 0;
  for (int s : schedule()) sum += s;
  return sum;
}

void FftConfig::validate() const {
  if (!is_pow2(n) || n < 4) throw std::invalid_argument("fft: n must be a power of two >= 4");
  if (data_bits < 2 || data_bits > 30) throw std::invalid_argument("fft: data_bits out of range");
  if (twiddle_bits < 3 || twiddle_bits > 30)
    throw std::invalid_argument("fft: twiddle_bits out of range");
  if (input_bits < 1 || input_bits > data_bits)
    throw std::invalid_argument("fft: input_bits must be in [1, data_bits]");
  if (!scaling_schedule.empty() && int(scaling_schedule.size()) != stages())
    throw std::invalid_argument("fft: schedule length != log2(n)");
  for (int s : schedule())
    if (s < 0 || s > 4) throw std::invalid_argument("fft: per-stage shift out of [0,4]");
  if (peak_search_min < 1 || peak_search_min > n / 2 - 2)
    throw std::invalid_argument("fft: peak_search_min out of [1, n/2-2]");
}

FixedFft::FixedFft(FftConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int n = cfg_.n;
  const int m = cfg_.stages();
  bitrev_.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    int r = 0, v = i;
    for (int b = 0; b < m; ++b) {
      r = (r << 1) | (v & 1);
      v >>= 1;
    }
    bitrev_[std::size_t(i)] = r;
  }
  // S2.(twiddle_bits-2) twiddles: +-1 representable exactly.
  const double scale = std::ldexp(1.0, cfg_.twiddle_bits - 2);
  tw_re_.resize(std::size_t(n / 2));
  tw_im_.resize(std::size_t(n / 2));
  for (int k = 0; k < n / 2; ++k) {
    const double ang = 2.0 * std::numbers::pi * k / n;
    tw_re_[std::size_t(k)] = std::int32_t(std::llround(std::cos(ang) * scale));
    tw_im_[std::size_t(k)] = std::int32_t(std::llround(-std::sin(ang) * scale));
  }
  sched_ = cfg_.schedule();
}

double FixedFft::output_scale() const { return std::ldexp(1.0, cfg_.total_shift()); }

std::vector<FixedComplex> FixedFft::transform(std::span<const std::int16_t> frame) const {
  const int n = cfg_.n;
  if (int(frame.size()) != n) throw std::invalid_argument("fft: frame length != n");

  const int gain = cfg_.input_gain_log2();
  // two's-complement datapath range; the most negative code is representable
  const std::int64_t limit_hi = (std::int64_t(1) << (cfg_.data_bits - 1)) - 1;
  const std::int64_t limit_lo = -(std::int64_t(1) << (cfg_.data_bits - 1));
  const std::int64_t in_limit = (std::int64_t(1) << (cfg_.input_bits - 1));
  const int tw_frac = cfg_.twiddle_bits - 2;

  std::vector<std::int64_t> re(std::size_t(n), 0), im(std::size_t(n), 0);
  for (int i = 0; i < n; ++i) {
    const std::int64_t v = frame[std::size_t(bitrev_[std::size_t(i)])];
    if (v >= in_limit || v < -in_limit)
      throw std::invalid_argument("fft: sample exceeds input_bits");
    re[std::size_t(i)] = v << gain;
  }

  for (int stage = 1; stage <= cfg_.stages(); ++stage) {
    const int len = 1 << stage;
    const int half = len >> 1;
    const int stride = n >> stage;
    const int sh = sched_[std::size_t(stage - 1)];
    for (int base = 0; base < n; base += len) {
      for (int j = 0; j < half; ++j) {
        const std::int64_t wr = tw_re_[std::size_t(j * stride)];
        const std::int64_t wi = tw_im_[std::size_t(j * stride)];
        const std::size_t ia = std::size_t(base + j);
        const std::size_t ib = std::size_t(base + j + half);
        const std::int64_t tr = shift_round(re[ib] * wr - im[ib] * wi, tw_frac, cfg_.rounding);
        const std::int64_t ti = shift_round(re[ib] * wi + im[ib] * wr, tw_frac, cfg_.rounding);
        const std::int64_t ar = re[ia], ai = im[ia];
        re[ia] = shift_round(ar + tr, sh, cfg_.rounding);
        im[ia] = shift_round(ai + ti, sh, cfg_.rounding);
        re[ib] = shift_round(ar - tr, sh, cfg_.rounding);
        im[ib] = shift_round(ai - ti, sh, cfg_.rounding);
        for (const std::int64_t v : {re[ia], im[ia], re[ib], im[ib]}) {
          if (v > limit_hi || v < limit_lo)
            throw std::overflow_error("fft: datapath overflow (scaling schedule insufficient)");
        }
      }
    }
  }

  std::vector<FixedComplex> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[std::size_t(i)] = {std::int32_t(re[std::size_t(i)]), std::int32_t(im[std::size_t(i)])};
  return out;
}

std::vector<FixedComplex> fft_fixed(std::span<const std::int16_t> frame, const FftConfig& cfg) {
  return FixedFft(cfg).transform(frame);
}

std::vector<std::complex<double>> dft_oracle(std::span<const double> frame) {
  const int n = int(frame.size());
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double sr = 0.0, si = 0.0;
    for (int i = 0; i < n; ++i) {
      // exact index arithmetic keeps the twiddle angles clean
      const std::int64_t idx = (std::int64_t(i) * k) % n;
      const double ang = -2.0 * std::numbers::pi * double(idx) / n;
      sr += frame[std::size_t(i)] * std::cos(ang);
      si += frame[std::size_t(i)] * std::sin(ang);
    }
    out[std::size_t(k)] = {sr, si};
  }
  return out;
}

std::vector<std::complex<double>> dft_oracle(std::span<const std::int16_t> frame) {
  std::vector<double> widened(frame.begin(), frame.end());
  return dft_oracle(std::span<const double>(widened));
}

double magnitude(double re, double im) { return std::sqrt(re * re + im * im); }

std::vector<double> magnitude_spectrum(std::span<const FixedComplex> bins, int count) {
  if (count > int(bins.size())) throw std::invalid_argument("magnitude_spectrum: count too large");
  std::vector<double> mags(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    mags[std::size_t(k)] =
        magnitude(double(bins[std::size_t(k)].re), double(bins[std::size_t(k)].im));
  return mags;
}

SpectralPeak peak_detect(std::span<const double> magnitudes, int search_min) {
  const int half = int(magnitudes.size());
  if (half < 4) throw std::invalid_argument("peak_detect: need at least 4 magnitudes");
  const int lo = std::max(1, search_min);
  const int hi = half - 2;  // both neighbors always exist
  if (lo > hi) throw std::invalid_argument("peak_detect: empty search range");

  // fixed-point comparison keys, as the hardware comparator stage would use
  auto key = [](double m) { return std::int64_t(std::llround(m * 65536.0)); };

  int x0 = lo;
  std::int64_t best = key(magnitudes[std::size_t(lo)]);
  std::int64_t kmin = best, kmax = best;
  for (int k = lo + 1; k <= hi; ++k) {
    const std::int64_t v = key(magnitudes[std::size_t(k)]);
    if (v > best) {
      best = v;
      x0 = k;
    }
    kmin = std::min(kmin, v);
    kmax = std::max(kmax, v);
  }

  SpectralPeak peak;
  peak.x0 = x0;
  peak.y_m1 = magnitudes[std::size_t(x0 - 1)];
  peak.y0 = magnitudes[std::size_t(x0)];
  peak.y_p1 = magnitudes[std::size_t(x0 + 1)];
  peak.flat = (kmin == kmax);
  peak.low_confidence = peak.flat || peak.y0 < peak.y_m1 || peak.y0 < peak.y_p1;
  return peak;
}

SpectralPeak analyze_frame(const SampleFrame& frame, const FixedFft& fft) {
  if (!frame.padded || int(frame.samples.size()) != fft.config().n)
    throw std::invalid_argument("analyze_frame: frame must be padded to the FFT length");
  const auto bins = fft.transform(frame.samples);
  const auto mags = magnitude_spectrum(bins, fft.config().n / 2);
  SpectralPeak peak = peak_detect(mags, fft.config().peak_search_min);
  peak.frame_index = frame.frame_index;
  return peak;
}

}  // namespace fmeas
