#include "fmeas/transfer_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fmeas {

double ReadLatencyModel::tail_scale_s() const {
  if (p_over_12ms <= 0.0) return 0.0;
  return (tail_ref_s - tail_start_s) / std::log(p_over_12ms / p_over_100ms);
}

void ReadLatencyModel::validate() const {
  if (typical_s <= 0 || body_halfwidth_s < 0 || body_halfwidth_s >= typical_s)
    throw std::invalid_argument("latency: body must be positive and narrower than typical");
  if (p_over_12ms < 0 || p_over_12ms > 0.5 || p_over_100ms < 0)
    throw std::invalid_argument("latency: tail probabilities out of range");
  if (p_over_100ms > p_over_12ms)
    throw std::invalid_argument("latency: P(>100ms) must not exceed P(>12ms)");
  if (p_over_12ms > 0 && p_over_100ms <= 0)
    throw std::invalid_argument("latency: P(>100ms) must be positive when the tail has mass");
  if (typical_s + body_halfwidth_s > tail_start_s)
    throw std::invalid_argument("latency: body must stay below the tail start");
  if (tail_ref_s <= tail_start_s)
    throw std::invalid_argument("latency: tail reference must exceed tail start");
}

double sample_read_latency(const ReadLatencyModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng);
  if (u < model.p_over_12ms) {
    const double v = uni(rng);
    return model.tail_start_s - model.tail_scale_s() * std::log(1.0 - v);
  }
  return model.typical_s + model.body_halfwidth_s * (2.0 * uni(rng) - 1.0);
}

void DatapathConfig::validate() const {
  latency.validate();
  if (ingest_rate < 0) throw std::invalid_argument("datapath: ingest_rate must be >= 0");
  if (block_bytes <= 0 || frame_blocks < 1)
    throw std::invalid_argument("datapath: block/frame sizes must be positive");
  if (frame_bytes() > pcie_ram)
    throw std::invalid_argument("datapath: frame does not fit the PCIE RAM");
  if (ddr_capacity < frame_bytes())
    throw std::invalid_argument("datapath: DDR smaller than one frame");
  if (ddr_bandwidth <= 0 || write_bandwidth() <= 0)
    throw std::invalid_argument("datapath: bandwidths must be positive");
  if (fifo_capacity < ingest_rate * frame_bytes() / ddr_bandwidth)
    throw std::invalid_argument(
        "datapath: FIFO must cover the bytes arriving during one frame read");
  if (config_time < 0) throw std::invalid_argument("datapath: config_time must be >= 0");
}

TransferSim::TransferSim(DatapathConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  cfg_.validate();
  stats_.seed = cfg_.seed;
  in_config_ = true;
  config_end_t_ = cfg_.config_time;
  stats_.rounds = 1;
  record("config_start");
}

void TransferSim::record(const char* kind) {
  if (trace)
    trace->push_back({st_.clock, kind, st_.fifo_fill, st_.ddr_backlog, st_.pcie_fill});
}

void TransferSim::check_conservation() {
  const double rhs =
      st_.fifo_fill + st_.ddr_backlog + st_.pcie_fill + st_.delivered_bytes + st_.lost_bytes;
  const double err = std::abs(st_.produced - rhs);
  stats_.max_conservation_error = std::max(stats_.max_conservation_error, err);
  if (err > std::max(4.0, 1e-9 * st_.produced)) stats_.conservation_ok = false;
}

void TransferSim::advance_to(double t) {
  if (t <= st_.clock) return;
  const double delta = cfg_.ingest_rate * (t - st_.clock);
  st_.produced += delta;
  st_.fifo_fill += delta;
  if (st_.fifo_fill > cfg_.fifo_capacity) {
    st_.lost_bytes += st_.fifo_fill - cfg_.fifo_capacity;
    st_.fifo_fill = cfg_.fifo_capacity;
  }
  st_.max_fifo_fill = std::max(st_.max_fifo_fill, st_.fifo_fill);
  st_.max_ddr_backlog = std::max(st_.max_ddr_backlog, st_.ddr_backlog);
  st_.clock = t;
  check_conservation();
}

// fluid byte counts accumulate rounding; thresholds compare with a tolerance
constexpr double kByteEps = 1e-6;

bool TransferSim::ddr_full() const {
  return st_.ddr_backlog + cfg_.block_bytes > cfg_.ddr_capacity + kByteEps;
}

bool TransferSim::write_eligible() const {
  return ddr_op_ == DdrOp::none && st_.fifo_fill >= cfg_.block_bytes - kByteEps && !ddr_full();
}

bool TransferSim::read_preconditions() const {
  return ddr_op_ == DdrOp::none && st_.ddr_backlog >= cfg_.frame_bytes() &&
         st_.pcie_fill == 0.0 && !ipc_busy_;
}

bool TransferSim::read_admitted() const {
  return st_.fifo_fill <= cfg_.read_admit_threshold() || ddr_full() || cfg_.ingest_rate == 0.0;
}

void TransferSim::complete_block_write() {
  st_.fifo_fill -= cfg_.block_bytes;
  st_.ddr_backlog += cfg_.block_bytes;
  st_.ddr_write_addr = std::fmod(st_.ddr_write_addr + cfg_.block_bytes, cfg_.ddr_capacity);
  st_.max_ddr_backlog = std::max(st_.max_ddr_backlog, st_.ddr_backlog);
  ++stats_.blocks_written;
  ddr_op_ = DdrOp::none;
  record("block_done");
  check_conservation();
}

void TransferSim::complete_frame_read() {
  st_.ddr_backlog -= cfg_.frame_bytes();
  st_.pcie_fill += cfg_.frame_bytes();
  st_.ddr_read_addr = std::fmod(st_.ddr_read_addr + cfg_.frame_bytes(), cfg_.ddr_capacity);
  ddr_op_ = DdrOp::none;
  record("frame_done");
  check_conservation();
}

void TransferSim::complete_ipc_read() {
  st_.delivered_bytes += st_.pcie_fill;
  ++st_.delivered_frames;
  st_.pcie_fill = 0.0;
  ipc_busy_ = false;
  st_.pcie_busy = false;
  record("ipc_done");
  check_conservation();
  // the configuration and read processes run in turn; keep reading only
  // while more than one frame is pending
  if (st_.ddr_backlog > cfg_.frame_bytes()) return;
  enter_config();
}

void TransferSim::enter_config() {
  in_config_ = true;
  config_end_t_ = st_.clock + cfg_.config_time;
  reads_in_phase_ = 0;
  ++stats_.rounds;
  record("config_start");
}

void TransferSim::start_ipc_read() {
  double duration;
  if (cfg_.injected_stall_at_s >= 0.0 && !stall_injected_ &&
      st_.clock >= cfg_.injected_stall_at_s) {
    duration = cfg_.injected_stall_duration_s;
    stall_injected_ = true;
  } else {
    duration = sample_read_latency(cfg_.latency, rng_);
  }
  if (duration > 12e-3) ++stats_.timeouts_over_12ms;
  ipc_busy_ = true;
  st_.pcie_busy = true;
  ipc_done_t_ = st_.clock + duration;
  record("ipc_start");
}

void TransferSim::try_start() {
  if (write_eligible()) {
    ddr_op_ = DdrOp::write_block;
    ddr_done_t_ = st_.clock + cfg_.block_bytes / cfg_.write_bandwidth();
  } else if (read_preconditions() && read_admitted()) {
    ddr_op_ = DdrOp::read_frame;
    ddr_done_t_ = st_.clock + cfg_.frame_bytes() / cfg_.ddr_bandwidth;
    ++stats_.reads_started;
    if (st_.ddr_backlog >= cfg_.catch_up_threshold_frames * cfg_.frame_bytes())
      ++stats_.catch_up_reads;
    ++reads_in_phase_;
    record("read_start");
  }
  if (st_.pcie_fill >= cfg_.frame_bytes() && !in_config_ && !ipc_busy_) start_ipc_read();
}

TransferStats TransferSim::run(double duration_s) {
  const double t_end = st_.clock + duration_s;
  try_start();
  while (st_.clock < t_end) {
    double t_next = t_end;
    if (ddr_op_ != DdrOp::none) t_next = std::min(t_next, ddr_done_t_);
    if (ipc_busy_) t_next = std::min(t_next, ipc_done_t_);
    if (in_config_) t_next = std::min(t_next, config_end_t_);
    if (ddr_op_ == DdrOp::none && cfg_.ingest_rate > 0.0 &&
        st_.fifo_fill < cfg_.block_bytes && !ddr_full()) {
      t_next = std::min(t_next, st_.clock + (cfg_.block_bytes - st_.fifo_fill) / cfg_.ingest_rate);
    }
    if (t_next <= st_.clock)  // guarantee progress when a crossing rounds to now
      t_next = std::nextafter(st_.clock, std::numeric_limits<double>::infinity());
    advance_to(t_next);
    if (ddr_op_ == DdrOp::write_block && ddr_done_t_ <= st_.clock) complete_block_write();
    if (ddr_op_ == DdrOp::read_frame && ddr_done_t_ <= st_.clock) complete_frame_read();
    if (ipc_busy_ && ipc_done_t_ <= st_.clock) complete_ipc_read();
    if (in_config_ && config_end_t_ <= st_.clock) {
      in_config_ = false;
      record("config_end");
    }
    try_start();
  }

  stats_.duration = st_.clock;
  stats_.produced = st_.produced;
  stats_.delivered_bytes = st_.delivered_bytes;
  stats_.lost_bytes = st_.lost_bytes;
  stats_.delivered_frames = st_.delivered_frames;
  stats_.max_fifo_fill = st_.max_fifo_fill;
  stats_.max_ddr_backlog = st_.max_ddr_backlog;
  return stats_;
}

bool TransferSim::step_write_block() {
  if (!write_eligible()) return false;
  ddr_op_ = DdrOp::write_block;
  ddr_done_t_ = st_.clock + cfg_.block_bytes / cfg_.write_bandwidth();
  advance_to(ddr_done_t_);
  complete_block_write();
  return true;
}

bool TransferSim::step_read_frame() {
  if (!read_preconditions()) return false;
  ddr_op_ = DdrOp::read_frame;
  ddr_done_t_ = st_.clock + cfg_.frame_bytes() / cfg_.ddr_bandwidth;
  ++stats_.reads_started;
  advance_to(ddr_done_t_);
  complete_frame_read();
  return true;
}

int TransferSim::step_catch_up() {
  int reads = 0;
  while (st_.ddr_backlog >= 2.0 * cfg_.frame_bytes()) {
    if (st_.pcie_fill > 0.0) {
      // deterministic host drain at the typical latency
      advance_to(st_.clock + cfg_.latency.typical_s);
      st_.delivered_bytes += st_.pcie_fill;
      ++st_.delivered_frames;
      st_.pcie_fill = 0.0;
      check_conservation();
    }
    if (!step_read_frame()) break;
    ++reads;
  }
  return reads;
}

void TransferSim::force_fifo_fill(double bytes) {
  st_.produced += bytes - st_.fifo_fill;
  st_.fifo_fill = bytes;
  st_.max_fifo_fill = std::max(st_.max_fifo_fill, st_.fifo_fill);
}

void TransferSim::force_ddr_backlog(double bytes) {
  st_.produced += bytes - st_.ddr_backlog;
  st_.ddr_backlog = bytes;
  st_.max_ddr_backlog = std::max(st_.max_ddr_backlog, st_.ddr_backlog);
}

TransferStats run_simulation(const DatapathConfig& cfg, double duration_s,
                             std::vector<TraceEvent>* trace) {
  TransferSim sim(cfg);
  sim.trace = trace;
  return sim.run(duration_s);
}

double max_survivable_stall(const DatapathConfig& cfg) {
  if (cfg.ingest_rate <= 0.0) return std::numeric_limits<double>::infinity();
  return (cfg.ddr_capacity + cfg.fifo_capacity) / cfg.ingest_rate;
}

nlohmann::json TransferStats::to_json() const {
  return nlohmann::json{{"duration_s", duration},
                        {"produced_bytes", produced},
                        {"delivered_bytes", delivered_bytes},
                        {"lost_bytes", lost_bytes},
                        {"delivered_frames", delivered_frames},
                        {"blocks_written", blocks_written},
                        {"reads_started", reads_started},
                        {"catch_up_reads", catch_up_reads},
                        {"timeouts_over_12ms", timeouts_over_12ms},
                        {"rounds", rounds},
                        {"max_fifo_fill_bytes", max_fifo_fill},
                        {"max_fifo_fill_kib", max_fifo_fill / kKiB},
                        {"max_ddr_backlog_bytes", max_ddr_backlog},
                        {"max_ddr_backlog_mib", max_ddr_backlog / kMiB},
                        {"conservation_ok", conservation_ok},
                        {"max_conservation_error_bytes", max_conservation_error},
                        {"seed", seed}};
}

}  // namespace fmeas
