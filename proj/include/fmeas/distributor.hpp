#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fmeas/framing.hpp"

#include "json.hpp"

namespace fmeas {

// Parallel-to-serial distribution: 40 input lanes fanned out to
// groups x subgroups serial lanes, one FFT pipeline per lane.
struct P2SConfig {
  int input_lanes = 40;
  int sample_bits = 12;
  int groups = 3;
  int subgroups = 8;
  int total_lanes = 24;
  int frame_points = 440;

  int frame_cycles_stage1() const { return (frame_points + input_lanes - 1) / input_lanes; }
  int frame_cycles_stage2() const { return (frame_points + subgroups - 1) / subgroups; }
  void validate() const;
};

struct StageReport {
  std::string name;
  std::int64_t demux_nodes_bits = 0;
  int fifo_count = 0;
  int fifo_width_bits = 0;
  int depth_required = 0;
  int depth_actual = 0;  // next power of two
  double utilization = 0.0;
  std::int64_t fifo_bytes = 0;
};

struct ResourceReport {
  std::string structure;
  std::int64_t demux_nodes_bits = 0;
  std::int64_t fifo_bytes_total = 0;
  std::vector<StageReport> stages;
  double node_reduction_vs_single = 0.0;  // two-stage only
  double fifo_savings_vs_single = 0.0;    // two-stage only
  std::string note;

  nlohmann::json to_json() const;
};

int route_single_stage(std::int64_t frame_index, const P2SConfig& cfg);
int route_two_stage(std::int64_t frame_index, const P2SConfig& cfg);

ResourceReport resource_report_single_stage(const P2SConfig& cfg);
ResourceReport resource_report_two_stage(const P2SConfig& cfg);

// Route frames into per-lane queues via the two-stage mapping; lossless.
std::vector<std::vector<SampleFrame>> distribute(std::vector<SampleFrame> frames,
                                                 const P2SConfig& cfg);

}  // namespace fmeas
