#include "fmeas/framing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fmeas {

namespace {

double normalized_autocorr(std::span<const std::int16_t> x, int lag) {
  const std::size_t n = x.size() - std::size_t(lag);
  std::int64_t s01 = 0, s00 = 0, s11 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t a = x[i];
    const std::int64_t b = x[i + lag];
    s01 += a * b;
    s00 += a * a;
    s11 += b * b;
  }
  if (s00 == 0 || s11 == 0) return 0.0;
  return double(s01) / std::sqrt(double(s00) * double(s11));
}

}  // namespace

int estimate_period(std::span<const std::int16_t> signal, const PeriodOptions& opt) {
  const std::int64_t len = std::int64_t(signal.size());
  if (opt.min_lag < 1) throw std::invalid_argument("estimate_period: min_lag must be >= 1");
  const int max_lag = int(std::min<std::int64_t>(opt.max_lag, len / 3));
  if (max_lag <= opt.min_lag)
    throw std::invalid_argument("estimate_period: signal too short (need >= 3 periods)");

  std::vector<double> r(std::size_t(max_lag - opt.min_lag), 0.0);
  parallel_for(std::int64_t(r.size()), opt.exec,
               [&](std::int64_t i) { r[i] = normalized_autocorr(signal, opt.min_lag + int(i)); });

  int best = opt.min_lag;
  double best_r = r[0];
  for (int lag = opt.min_lag + 1; lag < max_lag; ++lag) {
    const double v = r[lag - opt.min_lag];
    if (v > best_r) {
      best_r = v;
      best = lag;
    }
  }
  if (best_r < opt.threshold) throw std::runtime_error("period not found");

  // The correlation at 2x or 3x the true period ties with the fundamental;
  // prefer the smallest divisor whose correlation deficit is comparable.
  for (int k = 8; k >= 2; --k) {
    const int cand = int(std::llround(double(best) / k));
    int pick = -1;
    double pick_r = -2.0;
    for (int c = cand - 1; c <= cand + 1; ++c) {
      if (c < opt.min_lag || c >= max_lag || c == best) continue;
      const double v = r[c - opt.min_lag];
      if (v > pick_r) {
        pick_r = v;
        pick = c;
      }
    }
    if (pick >= 0 && (1.0 - pick_r) <= 2.0 * (1.0 - best_r) + 1e-12 && pick_r >= opt.threshold) {
      return pick;
    }
  }
  return best;
}

SplitResult split_frames(std::span<const std::int16_t> signal, int period,
                         const SplitOptions& opt) {
  if (period <= 0) throw std::invalid_argument("split_frames: period must be > 0");
  const std::int64_t len = std::int64_t(signal.size());
  SplitResult result;
  if (period > len) {
    result.period_exceeds_signal = true;
    return result;
  }

  const int window = std::max<int>(1, int(std::llround(opt.gap_search_frac * period)));
  const int ew = std::max(1, opt.energy_window);

  // prefix sums of |x| for the moving-average energy criterion
  std::vector<std::int64_t> prefix(std::size_t(len) + 1, 0);
  for (std::int64_t i = 0; i < len; ++i)
    prefix[i + 1] = prefix[i] + std::abs(std::int64_t(signal[i]));
  auto window_energy = [&](std::int64_t i) {
    const std::int64_t j = std::min<std::int64_t>(i + ew, len);
    return prefix[j] - prefix[i];
  };

  std::vector<std::int64_t> cuts{0};
  for (std::int64_t k = 1; k * period < len; ++k) {
    const std::int64_t nominal = k * period;
    const std::int64_t lo = std::max<std::int64_t>(cuts.back() + 1, nominal - window);
    const std::int64_t hi = std::min<std::int64_t>(len - 1, nominal + window);
    if (lo > hi) break;
    std::int64_t best = lo;
    std::int64_t best_e = window_energy(lo);
    for (std::int64_t i = lo + 1; i <= hi; ++i) {
      const std::int64_t e = window_energy(i);
      if (e < best_e) {
        best_e = e;
        best = i;
      }
    }
    cuts.push_back(best);
  }
  cuts.push_back(len);

  result.frames.reserve(cuts.size() - 1);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    SampleFrame f;
    f.samples.assign(signal.begin() + cuts[k], signal.begin() + cuts[k + 1]);
    f.active_len = int(cuts[k + 1] - cuts[k]);
    f.frame_index = std::int64_t(k);
    result.frames.push_back(std::move(f));
  }
  return result;
}

SampleFrame pad_frame(const SampleFrame& frame, int target_len) {
  if (int(frame.samples.size()) > target_len)
    throw std::invalid_argument("pad_frame: frame too long");
  SampleFrame out = frame;
  out.samples.resize(std::size_t(target_len), 0);
  out.padded = true;
  return out;
}

}  // namespace fmeas
