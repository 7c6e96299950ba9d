// fmeas: desk-scale model of a pulsed-microwave real-time frequency
// measurement pipeline. Subcommands generate stimuli, run the measurement
// chain, sweep campaigns, the transfer-datapath simulation, and the
// parallel-to-serial resource reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fmeas/pipeline.hpp"
#include "fmeas/report.hpp"
#include "fmeas/transfer_sim.hpp"

#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace fmeas;

namespace {

struct CommonOpts {
  std::string out_dir;
  bool serial = false;
  Exec exec() const { return serial ? Exec::serial : Exec::openmp; }
};

fs::path resolve_out(const CommonOpts& common, const std::string& cmd) {
  if (!common.out_dir.empty()) return common.out_dir;
  return fs::path("runs") / (cmd + "-" + iso_timestamp());
}

void add_common(CLI::App* app, CommonOpts& common) {
  app->add_option("--out", common.out_dir, "output directory (default runs/<cmd>-<timestamp>)");
  app->add_flag("--serial", common.serial, "run single-threaded");
}

void add_stimulus_opts(CLI::App* app, StimulusConfig& cfg) {
  app->add_option("--carrier", cfg.carrier_freq_hz, "carrier frequency [Hz]");
  app->add_option("--rep-rate", cfg.repetition_rate_hz, "pulse repetition rate [Hz]");
  app->add_option("--sample-rate", cfg.sample_rate_hz, "sample rate [Hz]");
  app->add_option("--envelope", [&cfg](const std::vector<std::string>& v) {
        if (v[0] == "gaussian") cfg.envelope = EnvelopeKind::gaussian;
        else if (v[0] == "triangular") cfg.envelope = EnvelopeKind::triangular;
        else return false;
        return true;
      }, "pulse envelope: gaussian|triangular");
  app->add_option("--envelope-param", cfg.envelope_param_s,
                  "gaussian sigma / triangle base width [s]");
  app->add_option("--active-len", cfg.active_len, "envelope support [samples]");
  app->add_option("--visibility", cfg.visibility, "modulation visibility (0,1]");
  app->add_option("--amplitude", cfg.amplitude_fullscale_fraction,
                  "peak amplitude as a fraction of full scale (0,1]");
  app->add_option("--snr", [&cfg](const std::vector<std::string>& v) {
        if (v[0] == "none") {
          cfg.snr_db.reset();
          return true;
        }
        try {
          cfg.snr_db = std::stod(v[0]);
        } catch (const std::exception&) {
          return false;
        }
        return true;
      }, "SNR over the active region [dB], or 'none'");
  app->add_option("--pulses", cfg.n_pulses, "number of pulses");
  app->add_option("--seed", cfg.seed, "noise seed");
}

void add_fft_opts(CLI::App* app, PipelineConfig& cfg) {
  app->add_option("--peak-search-min", cfg.fft.peak_search_min,
                  "lowest bin considered by the peak search");
  app->add_option("--vertex", [&cfg](const std::vector<std::string>& v) {
        if (v[0] == "standard") cfg.vertex = VertexFormula::standard;
        else if (v[0] == "legacy") cfg.vertex = VertexFormula::legacy_compat;
        else return false;
        return true;
      }, "vertex formula: standard|legacy");
  app->add_option("--min-frame-len", cfg.min_frame_len, "drop split frames shorter than this");
}

void print_outcome(const CampaignOutcome& outcome) {
  for (const auto& level : outcome.levels) {
    std::printf("  %-12s max deviation %8.3f MHz   max range %8.3f MHz\n",
                level.name.c_str(), level.result.max_deviation_hz() / 1e6,
                level.result.max_range_hz() / 1e6);
  }
  for (const auto& msg : outcome.messages) std::printf("  check failed: %s\n", msg.c_str());
  std::printf("campaign %s\n", outcome.passed ? "passed" : "FAILED");
}

void write_levels(const fs::path& dir, const CampaignOutcome& outcome) {
  for (const auto& level : outcome.levels) {
    write_experiment_csv(dir / (level.result.label + ".csv"), level.result);
    write_json_file(dir / (level.result.label + ".json"), experiment_json(level.result));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequency measurement pipeline model"};
  // key=value config file with [subcommand] sections; flags override it
  app.set_config("--config", "", "read options from a config file");
  app.fallthrough();
  app.require_subcommand(1);

  CommonOpts common;
  PipelineConfig pipeline_cfg;
  SweepConfig sweep_cfg;
  DatapathConfig datapath_cfg;

  // generate: stimulus waveform export (the time-domain path)
  auto* cmd_gen = app.add_subcommand("generate", "generate a stimulus and export the waveform");
  add_common(cmd_gen, common);
  add_stimulus_opts(cmd_gen, pipeline_cfg.stimulus);
  bool gen_no_csv = false;
  cmd_gen->add_flag("--no-csv", gen_no_csv, "skip the CSV export");

  // measure: single-carrier run of the full chain
  auto* cmd_measure = app.add_subcommand("measure", "run the measurement chain at one carrier");
  add_common(cmd_measure, common);
  add_stimulus_opts(cmd_measure, pipeline_cfg.stimulus);
  add_fft_opts(cmd_measure, pipeline_cfg);
  bool dump_frames = false, dump_spectra = false, dump_peaks = false;
  cmd_measure->add_flag("--dump-frames", dump_frames, "write the split frames as CSV");
  cmd_measure->add_flag("--dump-spectra", dump_spectra, "write the first frame's spectrum");
  cmd_measure->add_flag("--dump-peaks", dump_peaks, "write the per-frame peak records");

  // sweep / snr / amplitude campaigns
  auto add_sweep_opts = [&](CLI::App* cmd) {
    add_common(cmd, common);
    add_stimulus_opts(cmd, sweep_cfg.base.stimulus);
    add_fft_opts(cmd, sweep_cfg.base);
    cmd->add_option("--f-start", sweep_cfg.f_start_hz, "sweep start [Hz]");
    cmd->add_option("--f-stop", sweep_cfg.f_stop_hz, "sweep stop [Hz]");
    cmd->add_option("--f-step", sweep_cfg.f_step_hz, "sweep step [Hz]");
    cmd->add_option("--frames", sweep_cfg.frames_per_point, "frames per sweep point");
    cmd->add_option("--sweep-seed", sweep_cfg.seed, "campaign seed");
  };
  auto* cmd_sweep = app.add_subcommand("sweep", "carrier sweep with per-point statistics");
  add_sweep_opts(cmd_sweep);
  double sweep_snr = -1;
  cmd_sweep->add_option("--sweep-snr", sweep_snr, "add noise at this SNR [dB]");
  double sweep_amp = 1.0;
  cmd_sweep->add_option("--sweep-amplitude", sweep_amp, "full-scale fraction for the sweep");

  auto* cmd_snr = app.add_subcommand("snr", "sweep campaign over SNR levels");
  add_sweep_opts(cmd_snr);
  std::vector<double> snr_levels{60.0, 40.0, 20.0};
  cmd_snr->add_option("--levels", snr_levels, "SNR levels [dB]");

  auto* cmd_amp = app.add_subcommand("amplitude", "sweep campaign over source amplitude levels");
  add_sweep_opts(cmd_amp);
  std::vector<double> amp_levels{1.0, 0.75, 0.5};
  double atten_db = 6.0;
  cmd_amp->add_option("--levels-vpp", amp_levels, "source amplitude levels [Vpp]");
  cmd_amp->add_option("--atten-db", atten_db, "attenuation ahead of the converter [dB]");

  // transfer-sim
  auto* cmd_transfer = app.add_subcommand("transfer-sim", "discrete-event transfer datapath run");
  add_common(cmd_transfer, common);
  double duration_s = 60.0;
  int n_seeds = 1;
  bool with_trace = false;
  cmd_transfer->add_option("--duration", duration_s, "simulated seconds");
  cmd_transfer->add_option("--seeds", n_seeds, "number of seeds to run");
  cmd_transfer->add_option("--seed", datapath_cfg.seed, "first seed");
  cmd_transfer->add_option("--ingest-rate", datapath_cfg.ingest_rate, "producer rate [bytes/s]");
  cmd_transfer->add_option("--fifo-capacity", datapath_cfg.fifo_capacity, "FIFO size [bytes]");
  cmd_transfer->add_option("--ddr-capacity", datapath_cfg.ddr_capacity, "DDR size [bytes]");
  cmd_transfer->add_option("--ddr-bandwidth", datapath_cfg.ddr_bandwidth,
                           "DDR read bandwidth [bytes/s]");
  cmd_transfer->add_option("--ddr-write-bandwidth", datapath_cfg.ddr_write_bandwidth,
                           "DDR write bandwidth [bytes/s] (0: same as read)");
  cmd_transfer->add_option("--stall-at", datapath_cfg.injected_stall_at_s,
                           "inject a host-read stall at this time [s]");
  cmd_transfer->add_option("--stall-duration", datapath_cfg.injected_stall_duration_s,
                           "injected stall duration [s]");
  cmd_transfer->add_flag("--trace", with_trace, "dump the event trace as CSV");

  // resources
  auto* cmd_res = app.add_subcommand("resources", "parallel-to-serial resource reports");
  add_common(cmd_res, common);
  P2SConfig p2s_cfg;
  bool res_json_only = false;
  cmd_res->add_flag("--json", res_json_only, "print JSON only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) {
      const fs::path dir = resolve_out(common, "generate");
      const auto signal =
          apply_noise(pipeline_cfg.stimulus, generate_stimulus(pipeline_cfg.stimulus));
      const auto q = quantize(signal, kAdcFormat, pipeline_cfg.fullscale_volts);
      write_json_file(dir / "config.json", stimulus_config_json(pipeline_cfg.stimulus));
      write_waveform_raw_i16le(dir / "waveform.raw", q.samples);
      if (!gen_no_csv) write_waveform_csv(dir / "waveform.csv", q.samples);
      std::printf("wrote %zu samples (%zu clipped) to %s\n", q.samples.size(), q.clipped,
                  dir.string().c_str());
      return 0;
    }

    if (cmd_measure->parsed()) {
      const fs::path dir = resolve_out(common, "measure");
      write_json_file(dir / "config.json", pipeline_config_json(pipeline_cfg));
      const PipelineResult r = run_pipeline(pipeline_cfg, common.exec());
      write_estimates_csv(dir / "estimates.csv", r.estimates);
      write_json_file(dir / "estimates.json", estimates_json(r.estimates));

      double lo = 0, hi = 0, mean = 0;
      if (!r.estimates.empty()) {
        lo = hi = r.estimates[0].freq_hz;
        for (const auto& e : r.estimates) {
          lo = std::min(lo, e.freq_hz);
          hi = std::max(hi, e.freq_hz);
          mean += e.freq_hz;
        }
        mean /= double(r.estimates.size());
      }
      write_json_file(dir / "summary.json",
                      {{"n_estimates", r.estimates.size()},
                       {"mean_freq_hz", mean},
                       {"range_hz", hi - lo},
                       {"period_samples", r.stats.period},
                       {"frames_split", r.stats.frames_split},
                       {"frames_dropped", r.stats.frames_dropped},
                       {"clipped_samples", r.stats.clipped_samples}});
      if (dump_frames || dump_spectra || dump_peaks) {
        const auto signal =
            apply_noise(pipeline_cfg.stimulus, generate_stimulus(pipeline_cfg.stimulus));
        const auto q = quantize(signal, kAdcFormat, pipeline_cfg.fullscale_volts);
        auto split = split_frames(q.samples, r.stats.period);
        if (dump_frames) write_frames_csv(dir / "frames.csv", split.frames);
        const FixedFft fft(pipeline_cfg.fft);
        if (dump_spectra && !split.frames.empty()) {
          const auto padded = pad_frame(split.frames[0], pipeline_cfg.fft.n);
          const auto mags =
              magnitude_spectrum(fft.transform(padded.samples), pipeline_cfg.fft.n / 2);
          write_spectrum_csv(dir / "spectrum_frame0.csv", mags, 0);
        }
        if (dump_peaks) {
          std::vector<SpectralPeak> peaks;
          for (const auto& f : split.frames) {
            if (int(f.samples.size()) > pipeline_cfg.fft.n) continue;
            peaks.push_back(analyze_frame(pad_frame(f, pipeline_cfg.fft.n), fft));
          }
          write_peaks_csv(dir / "peaks.csv", peaks);
        }
      }
      std::printf("%zu estimates, mean %.6f GHz, range %.3f MHz -> %s\n", r.estimates.size(),
                  mean / 1e9, (hi - lo) / 1e6, dir.string().c_str());
      return 0;
    }

    if (cmd_sweep->parsed()) {
      const fs::path dir = resolve_out(common, "sweep");
      if (sweep_snr >= 0) sweep_cfg.snr_db = sweep_snr;
      sweep_cfg.amplitude_fraction = sweep_amp;
      write_json_file(dir / "config.json", sweep_config_json(sweep_cfg));
      const ExperimentResult result = sweep(sweep_cfg, common.exec());
      write_experiment_csv(dir / "sweep.csv", result);
      write_json_file(dir / "sweep.json", experiment_json(result));
      std::printf("%zu points, max deviation %.3f MHz, max range %.3f MHz -> %s\n",
                  result.points.size(), result.max_deviation_hz() / 1e6,
                  result.max_range_hz() / 1e6, dir.string().c_str());
      return 0;
    }

    if (cmd_snr->parsed()) {
      const fs::path dir = resolve_out(common, "snr");
      write_json_file(dir / "config.json", sweep_config_json(sweep_cfg));
      const CampaignOutcome outcome = snr_campaign(snr_levels, sweep_cfg, common.exec());
      write_levels(dir, outcome);
      print_outcome(outcome);
      return outcome.passed ? 0 : 1;
    }

    if (cmd_amp->parsed()) {
      const fs::path dir = resolve_out(common, "amplitude");
      write_json_file(dir / "config.json", sweep_config_json(sweep_cfg));
      const CampaignOutcome outcome =
          amplitude_campaign(amp_levels, atten_db, sweep_cfg, common.exec());
      write_levels(dir, outcome);
      print_outcome(outcome);
      return outcome.passed ? 0 : 1;
    }

    if (cmd_transfer->parsed()) {
      const fs::path dir = resolve_out(common, "transfer-sim");
      write_json_file(dir / "config.json", datapath_config_json(datapath_cfg));
      bool all_ok = true;
      nlohmann::json runs = nlohmann::json::array();
      for (int i = 0; i < n_seeds; ++i) {
        DatapathConfig cfg = datapath_cfg;
        cfg.seed = datapath_cfg.seed + std::uint64_t(i);
        std::vector<TraceEvent> trace;
        const TransferStats stats = run_simulation(cfg, duration_s, with_trace ? &trace : nullptr);
        if (with_trace)
          write_trace_csv(dir / ("trace-seed" + std::to_string(cfg.seed) + ".csv"), trace);
        runs.push_back(stats.to_json());
        all_ok = all_ok && stats.conservation_ok && stats.lost_bytes == 0.0;
        std::printf("seed %llu: delivered %lld frames, lost %.0f bytes, max fifo %.1f KiB, "
                    "max ddr %.2f MiB\n",
                    static_cast<unsigned long long>(cfg.seed),
                    static_cast<long long>(stats.delivered_frames), stats.lost_bytes,
                    stats.max_fifo_fill / kKiB, stats.max_ddr_backlog / kMiB);
      }
      write_json_file(dir / "stats.json",
                      {{"runs", runs},
                       {"max_survivable_stall_s", max_survivable_stall(datapath_cfg)}});
      std::printf("max survivable stall: %.2f s -> %s\n", max_survivable_stall(datapath_cfg),
                  dir.string().c_str());
      return all_ok ? 0 : 1;
    }

    if (cmd_res->parsed()) {
      const ResourceReport single = resource_report_single_stage(p2s_cfg);
      const ResourceReport two = resource_report_two_stage(p2s_cfg);
      const nlohmann::json j{{"single_stage", single.to_json()}, {"two_stage", two.to_json()}};
      if (res_json_only) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::printf("%-28s %15s %15s\n", "", "single-stage", "two-stage");
        std::printf("%-28s %15lld %15lld\n", "demux nodes [bits]",
                    static_cast<long long>(single.demux_nodes_bits),
                    static_cast<long long>(two.demux_nodes_bits));
        std::printf("%-28s %14.2f%% %14.2f%%\n", "stage-1 FIFO utilization",
                    single.stages[0].utilization * 100.0, two.stages[0].utilization * 100.0);
        std::printf("%-28s %15s %14.2f%%\n", "stage-2 FIFO utilization", "-",
                    two.stages[1].utilization * 100.0);
        std::printf("%-28s %15.4f %15.4f\n", "FIFO total [kByte]",
                    double(single.fifo_bytes_total) / 1024.0,
                    double(two.fifo_bytes_total) / 1024.0);
        std::printf("%-28s %15s %14.2f%%\n", "node reduction", "-",
                    two.node_reduction_vs_single * 100.0);
        std::printf("%-28s %15s %14.2f%%\n", "FIFO savings", "-",
                    two.fifo_savings_vs_single * 100.0);
        if (!two.note.empty()) std::printf("note: %s\n", two.note.c_str());
      }
      if (!common.out_dir.empty())
        write_json_file(fs::path(common.out_dir) / "resources.json", j);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
