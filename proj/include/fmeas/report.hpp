#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fmeas/fitting.hpp"
#include "fmeas/pipeline.hpp"
#include "fmeas/transfer_sim.hpp"

#include "json.hpp"

namespace fmeas {

std::string iso_timestamp();
std::string config_hash_hex(const nlohmann::json& j);  // FNV-1a over the canonical dump

nlohmann::json stimulus_config_json(const StimulusConfig& cfg);
nlohmann::json fft_config_json(const FftConfig& cfg);
nlohmann::json p2s_config_json(const P2SConfig& cfg);
nlohmann::json pipeline_config_json(const PipelineConfig& cfg);
nlohmann::json sweep_config_json(const SweepConfig& cfg);
nlohmann::json datapath_config_json(const DatapathConfig& cfg);

nlohmann::json experiment_json(const ExperimentResult& result);
ExperimentResult experiment_from_json(const nlohmann::json& j);

nlohmann::json estimates_json(std::span<const FrequencyEstimate> estimates);

// All writers throw std::runtime_error carrying the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_experiment_csv(const std::filesystem::path& path, const ExperimentResult& result);
void write_estimates_csv(const std::filesystem::path& path,
                         std::span<const FrequencyEstimate> estimates);
void write_waveform_csv(const std::filesystem::path& path, std::span<const std::int16_t> samples);
void write_waveform_raw_i16le(const std::filesystem::path& path,
                              std::span<const std::int16_t> samples);
void write_frames_csv(const std::filesystem::path& path, std::span<const SampleFrame> frames);
void write_peaks_csv(const std::filesystem::path& path, std::span<const SpectralPeak> peaks);
void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> magnitudes,
                        std::int64_t frame_index);
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceEvent> events);

}  // namespace fmeas
