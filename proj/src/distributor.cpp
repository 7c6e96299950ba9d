#include "fmeas/distributor.hpp"

#include <stdexcept>

namespace fmeas {

namespace {

int next_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

StageReport fifo_stage(std::string name, std::int64_t nodes_bits, int count, int width_bits,
                       int depth_required) {
  StageReport s;
  s.name = std::move(name);
  s.demux_nodes_bits = nodes_bits;
  s.fifo_count = count;
  s.fifo_width_bits = width_bits;
  s.depth_required = depth_required;
  s.depth_actual = next_pow2(depth_required);
  s.utilization = double(depth_required) / double(s.depth_actual);
  s.fifo_bytes = std::int64_t(count) * width_bits * s.depth_actual / 8;
  return s;
}

}  // namespace

void P2SConfig::validate() const {
  if (input_lanes < 1 || sample_bits < 1 || groups < 1 || subgroups < 1 || frame_points < 1)
    throw std::invalid_argument("P2SConfig: all counts must be >= 1");
  if (groups * subgroups != total_lanes)
    throw std::invalid_argument("P2SConfig: groups*subgroups != total_lanes");
}

int route_single_stage(std::int64_t frame_index, const P2SConfig& cfg) {
  if (frame_index < 0) throw std::invalid_argument("route: frame_index must be >= 0");
  return int(frame_index % cfg.total_lanes);
}

int route_two_stage(std::int64_t frame_index, const P2SConfig& cfg) {
  if (frame_index < 0) throw std::invalid_argument("route: frame_index must be >= 0");
  const int g = int(frame_index % cfg.groups);
  const int s = int((frame_index / cfg.groups) % cfg.subgroups);
  return g * cfg.subgroups + s;
}

ResourceReport resource_report_single_stage(const P2SConfig& cfg) {
  cfg.validate();
  ResourceReport r;
  r.structure = "single-stage";
  r.demux_nodes_bits = std::int64_t(cfg.sample_bits) * cfg.input_lanes * cfg.total_lanes;
  r.stages.push_back(fifo_stage("stage1", r.demux_nodes_bits, cfg.total_lanes,
                                cfg.input_lanes * cfg.sample_bits, cfg.frame_cycles_stage1()));
  r.fifo_bytes_total = r.stages[0].fifo_bytes;
  return r;
}

ResourceReport resource_report_two_stage(const P2SConfig& cfg) {
  cfg.validate();
  ResourceReport r;
  r.structure = "two-stage";
  const std::int64_t s1_nodes = std::int64_t(cfg.sample_bits) * cfg.input_lanes * cfg.groups;
  r.stages.push_back(fifo_stage("stage1", s1_nodes, cfg.groups,
                                cfg.input_lanes * cfg.sample_bits, cfg.frame_cycles_stage1()));
  r.stages.push_back(fifo_stage("stage2", 0, cfg.total_lanes, cfg.subgroups * cfg.sample_bits,
                                cfg.frame_cycles_stage2()));
  r.demux_nodes_bits = s1_nodes;
  r.fifo_bytes_total = r.stages[0].fifo_bytes + r.stages[1].fifo_bytes;

  const ResourceReport single = resource_report_single_stage(cfg);
  r.node_reduction_vs_single = 1.0 - double(r.demux_nodes_bits) / double(single.demux_nodes_bits);
  r.fifo_savings_vs_single = 1.0 - double(r.fifo_bytes_total) / double(single.fifo_bytes_total);
  if (cfg.input_lanes == 40 && cfg.groups == 3 && cfg.total_lanes == 24) {
    r.note =
        "node reduction computed from the counts is 87.5%; the 78.5% figure "
        "sometimes quoted for this structure is inconsistent with them";
  }
  return r;
}

std::vector<std::vector<SampleFrame>> distribute(std::vector<SampleFrame> frames,
                                                 const P2SConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<SampleFrame>> lanes(std::size_t(cfg.total_lanes));
  for (auto& frame : frames) {
    const int lane = route_two_stage(frame.frame_index, cfg);
    lanes[std::size_t(lane)].push_back(std::move(frame));
  }
  return lanes;
}

nlohmann::json ResourceReport::to_json() const {
  nlohmann::json stages_json = nlohmann::json::array();
  for (const auto& s : stages) {
    stages_json.push_back({{"name", s.name},
                           {"demux_nodes_bits", s.demux_nodes_bits},
                           {"fifo_count", s.fifo_count},
                           {"fifo_width_bits", s.fifo_width_bits},
                           {"depth_required", s.depth_required},
                           {"depth_actual", s.depth_actual},
                           {"utilization", s.utilization},
                           {"fifo_bytes", s.fifo_bytes}});
  }
  nlohmann::json j{{"structure", structure},
                   {"demux_nodes_bits", demux_nodes_bits},
                   {"fifo_bytes_total", fifo_bytes_total},
                   {"fifo_kbytes_total", double(fifo_bytes_total) / 1024.0},
                   {"stages", stages_json}};
  if (structure == "two-stage") {
    j["node_reduction_vs_single"] = node_reduction_vs_single;
    j["fifo_savings_vs_single"] = fifo_savings_vs_single;
  }
  if (!note.empty()) j["note"] = note;
  return j;
}

}  // namespace fmeas
