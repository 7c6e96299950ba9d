#include "fmeas/report.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fmeas {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string config_hash_hex(const nlohmann::json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json stimulus_config_json(const StimulusConfig& cfg) {
  return {{"carrier_freq_hz", cfg.carrier_freq_hz},
          {"repetition_rate_hz", cfg.repetition_rate_hz},
          {"sample_rate_hz", cfg.sample_rate_hz},
          {"envelope", cfg.envelope == EnvelopeKind::gaussian ? "gaussian" : "triangular"},
          {"envelope_param_s", cfg.envelope_param_s},
          {"active_len", cfg.active_len},
          {"visibility", cfg.visibility},
          {"dc_level", cfg.dc_level},
          {"amplitude_fullscale_fraction", cfg.amplitude_fullscale_fraction},
          {"snr_db", cfg.snr_db ? nlohmann::json(*cfg.snr_db) : nlohmann::json(nullptr)},
          {"n_pulses", cfg.n_pulses},
          {"seed", cfg.seed}};
}

nlohmann::json fft_config_json(const FftConfig& cfg) {
  return {{"n", cfg.n},
          {"data_bits", cfg.data_bits},
          {"twiddle_bits", cfg.twiddle_bits},
          {"input_bits", cfg.input_bits},
          {"scaling_schedule", cfg.schedule()},
          {"rounding", cfg.rounding == FftConfig::Rounding::round_half_up ? "round_half_up"
                                                                          : "truncate"},
          {"peak_search_min", cfg.peak_search_min}};
}

nlohmann::json p2s_config_json(const P2SConfig& cfg) {
  return {{"input_lanes", cfg.input_lanes}, {"sample_bits", cfg.sample_bits},
          {"groups", cfg.groups},           {"subgroups", cfg.subgroups},
          {"total_lanes", cfg.total_lanes}, {"frame_points", cfg.frame_points}};
}

nlohmann::json pipeline_config_json(const PipelineConfig& cfg) {
  return {{"stimulus", stimulus_config_json(cfg.stimulus)},
          {"fft", fft_config_json(cfg.fft)},
          {"p2s", p2s_config_json(cfg.p2s)},
          {"fullscale_volts", cfg.fullscale_volts},
          {"vertex", cfg.vertex == VertexFormula::standard ? "standard" : "legacy_compat"},
          {"min_frame_len", cfg.min_frame_len},
          {"estimate_period_from_signal", cfg.estimate_period_from_signal}};
}

nlohmann::json sweep_config_json(const SweepConfig& cfg) {
  return {{"f_start_hz", cfg.f_start_hz},
          {"f_stop_hz", cfg.f_stop_hz},
          {"f_step_hz", cfg.f_step_hz},
          {"frames_per_point", cfg.frames_per_point},
          {"snr_db", cfg.snr_db ? nlohmann::json(*cfg.snr_db) : nlohmann::json(nullptr)},
          {"amplitude_fraction", cfg.amplitude_fraction},
          {"seed", cfg.seed},
          {"base", pipeline_config_json(cfg.base)}};
}

nlohmann::json datapath_config_json(const DatapathConfig& cfg) {
  return {{"ingest_rate", cfg.ingest_rate},
          {"fifo_capacity", cfg.fifo_capacity},
          {"block_bytes", cfg.block_bytes},
          {"frame_blocks", cfg.frame_blocks},
          {"ddr_capacity", cfg.ddr_capacity},
          {"ddr_bandwidth", cfg.ddr_bandwidth},
          {"ddr_write_bandwidth", cfg.ddr_write_bandwidth},
          {"pcie_ram", cfg.pcie_ram},
          {"config_time", cfg.config_time},
          {"latency",
           {{"typical_s", cfg.latency.typical_s},
            {"body_halfwidth_s", cfg.latency.body_halfwidth_s},
            {"p_over_12ms", cfg.latency.p_over_12ms},
            {"p_over_100ms", cfg.latency.p_over_100ms},
            {"tail_start_s", cfg.latency.tail_start_s},
            {"tail_ref_s", cfg.latency.tail_ref_s}}},
          {"seed", cfg.seed},
          {"catch_up_threshold_frames", cfg.catch_up_threshold_frames},
          {"injected_stall_at_s", cfg.injected_stall_at_s},
          {"injected_stall_duration_s", cfg.injected_stall_duration_s}};
}

nlohmann::json experiment_json(const ExperimentResult& result) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : result.points) {
    points.push_back({{"true_freq_hz", p.true_freq_hz},
                      {"mean_est_hz", p.mean_est_hz},
                      {"max_deviation_hz", p.max_deviation_hz},
                      {"range_hz", p.range_hz},
                      {"n_frames", p.n_frames}});
  }
  return {{"label", result.label},
          {"seed", result.seed},
          {"config_hash", result.config_hash},
          {"timestamp", result.timestamp},
          {"sample_rate_hz", result.sample_rate_hz},
          {"fft_n", result.fft_n},
          {"max_deviation_hz", result.max_deviation_hz()},
          {"max_range_hz", result.max_range_hz()},
          {"points", points}};
}

ExperimentResult experiment_from_json(const nlohmann::json& j) {
  ExperimentResult r;
  r.label = j.at("label").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  r.fft_n = j.at("fft_n").get<int>();
  for (const auto& pj : j.at("points")) {
    PointStats p;
    p.true_freq_hz = pj.at("true_freq_hz").get<double>();
    p.mean_est_hz = pj.at("mean_est_hz").get<double>();
    p.max_deviation_hz = pj.at("max_deviation_hz").get<double>();
    p.range_hz = pj.at("range_hz").get<double>();
    p.n_frames = pj.at("n_frames").get<int>();
    r.points.push_back(p);
  }
  return r;
}

nlohmann::json estimates_json(std::span<const FrequencyEstimate> estimates) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : estimates) {
    arr.push_back({{"frame_index", e.frame_index},
                   {"x_c_raw", e.x_c_raw},
                   {"x_c", e.x_c},
                   {"freq_hz", e.freq_hz},
                   {"edge_clamped", e.edge_clamped},
                   {"flat_spectrum", e.flat_spectrum},
                   {"denominator_degenerate", e.denominator_degenerate},
                   {"low_confidence", e.low_confidence}});
  }
  return arr;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  auto out = open_for_write(path, std::ios::out);
  out << content;
  finish(out, path);
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_experiment_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  auto out = open_for_write(path, std::ios::out);
  out << "# label=" << result.label << " config_hash=" << result.config_hash
      << " seed=" << result.seed << " timestamp=" << result.timestamp << "\n";
  out << "true_freq_hz,mean_est_hz,max_deviation_hz,range_hz,n_frames\n";
  out.precision(12);
  for (const auto& p : result.points) {
    out << p.true_freq_hz << ',' << p.mean_est_hz << ',' << p.max_deviation_hz << ','
        << p.range_hz << ',' << p.n_frames << '\n';
  }
  finish(out, path);
}

void write_estimates_csv(const std::filesystem::path& path,
                         std::span<const FrequencyEstimate> estimates) {
  auto out = open_for_write(path, std::ios::out);
  out << "frame_index,x_c_raw,x_c,freq_hz,edge_clamped,flat_spectrum,denominator_degenerate,"
         "low_confidence\n";
  out.precision(12);
  for (const auto& e : estimates) {
    out << e.frame_index << ',' << e.x_c_raw << ',' << e.x_c << ',' << e.freq_hz << ','
        << int(e.edge_clamped) << ',' << int(e.flat_spectrum) << ','
        << int(e.denominator_degenerate) << ',' << int(e.low_confidence) << '\n';
  }
  finish(out, path);
}

void write_waveform_csv(const std::filesystem::path& path, std::span<const std::int16_t> samples) {
  auto out = open_for_write(path, std::ios::out);
  out << "index,value\n";
  for (std::size_t i = 0; i < samples.size(); ++i) out << i << ',' << samples[i] << '\n';
  finish(out, path);
}

void write_waveform_raw_i16le(const std::filesystem::path& path,
                              std::span<const std::int16_t> samples) {
  auto out = open_for_write(path, std::ios::out | std::ios::binary);
  for (std::int16_t v : samples) {
    const unsigned char bytes[2] = {static_cast<unsigned char>(v & 0xFF),
                                    static_cast<unsigned char>((v >> 8) & 0xFF)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
  finish(out, path);
}

void write_frames_csv(const std::filesystem::path& path, std::span<const SampleFrame> frames) {
  auto out = open_for_write(path, std::ios::out);
  out << "frame_index,sample_index,value\n";
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < f.samples.size(); ++i)
      out << f.frame_index << ',' << i << ',' << f.samples[i] << '\n';
  }
  finish(out, path);
}

void write_peaks_csv(const std::filesystem::path& path, std::span<const SpectralPeak> peaks) {
  auto out = open_for_write(path, std::ios::out);
  out << "frame_index,x0,y_m1,y0,y_p1,flat,low_confidence\n";
  out.precision(12);
  for (const auto& p : peaks) {
    out << p.frame_index << ',' << p.x0 << ',' << p.y_m1 << ',' << p.y0 << ',' << p.y_p1 << ','
        << int(p.flat) << ',' << int(p.low_confidence) << '\n';
  }
  finish(out, path);
}

void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> magnitudes,
                        std::int64_t frame_index) {
  auto out = open_for_write(path, std::ios::out);
  out << "frame_index,bin,magnitude\n";
  out.precision(12);
  for (std::size_t k = 0; k < magnitudes.size(); ++k)
    out << frame_index << ',' << k << ',' << magnitudes[k] << '\n';
  finish(out, path);
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceEvent> events) {
  auto out = open_for_write(path, std::ios::out);
  out << "time_s,event,fifo_fill,ddr_backlog,pcie_fill\n";
  out.precision(12);
  for (const auto& e : events) {
    out << e.t << ',' << e.kind << ',' << e.fifo_fill << ',' << e.ddr_backlog << ','
        << e.pcie_fill << '\n';
  }
  finish(out, path);
}

}  // namespace fmeas
