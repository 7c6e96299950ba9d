// Serial-vs-OpenMP comparison for the data-parallel kernels: per-frame
// spectral analysis, autocorrelation period search, and sweep batches.

#include <benchmark/benchmark.h>

#include "fmeas/pipeline.hpp"

using namespace fmeas;

namespace {

std::vector<SampleFrame> make_frames(int n_pulses) {
  StimulusConfig cfg;
  cfg.n_pulses = n_pulses;
  const auto q = quantize(generate_stimulus(cfg), kAdcFormat, 2.0);
  auto split = split_frames(q.samples, cfg.period_samples());
  std::vector<SampleFrame> frames;
  for (auto& f : split.frames)
    if (f.active_len >= 440) frames.push_back(pad_frame(f, 512));
  return frames;
}

void analyze_all(const std::vector<SampleFrame>& frames, const FixedFft& fft, Exec exec,
                 std::vector<int>& out) {
  parallel_for(std::int64_t(frames.size()), exec, [&](std::int64_t i) {
    out[std::size_t(i)] = analyze_frame(frames[std::size_t(i)], fft).x0;
  });
}

void bm_analyze_frames(benchmark::State& state, Exec exec) {
  const auto frames = make_frames(int(state.range(0)));
  const FixedFft fft{FftConfig{}};
  std::vector<int> peaks(frames.size());
  for (auto _ : state) {
    analyze_all(frames, fft, exec, peaks);
    benchmark::DoNotOptimize(peaks.data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(frames.size()));
}

void bm_estimate_period(benchmark::State& state, Exec exec) {
  StimulusConfig cfg;
  cfg.n_pulses = int(state.range(0));
  const auto q = quantize(generate_stimulus(cfg), kAdcFormat, 2.0);
  PeriodOptions opt;
  opt.min_lag = 227;
  opt.max_lag = 1137;
  opt.exec = exec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_period(q.samples, opt));
  }
}

void bm_sweep(benchmark::State& state, Exec exec) {
  SweepConfig cfg;
  cfg.f_start_hz = 1e9;
  cfg.f_stop_hz = 1e9 + double(state.range(0) - 1) * 10e6;
  cfg.f_step_hz = 10e6;
  cfg.frames_per_point = 20;
  for (auto _ : state) {
    const auto result = sweep(cfg, exec);
    benchmark::DoNotOptimize(result.points.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(bm_analyze_frames, serial, Exec::serial)->Arg(240)->Arg(2400)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_analyze_frames, openmp, Exec::openmp)->Arg(240)->Arg(2400)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_estimate_period, serial, Exec::serial)->Arg(100)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_estimate_period, openmp, Exec::openmp)->Arg(100)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_sweep, serial, Exec::serial)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_sweep, openmp, Exec::openmp)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
