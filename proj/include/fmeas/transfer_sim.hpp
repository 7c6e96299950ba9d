#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "json.hpp"

namespace fmeas {

inline constexpr double kKiB = 1024.0;
inline constexpr double kMiB = 1024.0 * 1024.0;
inline constexpr double kGiB = 1024.0 * 1024.0 * 1024.0;

// Host read latency: uniform body around the typical value plus an
// exponential tail calibrated at the two exceedance quantiles.
struct ReadLatencyModel {
  double typical_s = 5e-3;
  double body_halfwidth_s = 2e-3;
  double p_over_12ms = 0.003;
  double p_over_100ms = 3e-5;
  double tail_start_s = 12e-3;
  double tail_ref_s = 100e-3;

  double tail_scale_s() const;
  void validate() const;
};

double sample_read_latency(const ReadLatencyModel& model, std::mt19937_64& rng);

// Producer -> FIFO -> DDR (half duplex) -> PCIE RAM -> host reader.
// All byte quantities are binary (kiB/MiB/GiB).
struct DatapathConfig {
  double ingest_rate = 88.0 * kMiB;        // bytes/s
  double fifo_capacity = 512.0 * kKiB;
  double block_bytes = 160.0 * kKiB;       // FIFO -> DDR granule
  int frame_blocks = 16;                   // DDR -> PCIE granule, 2.5 MiB
  double ddr_capacity = 2.0 * kGiB;
  double ddr_bandwidth = 500.0 * kMiB;     // DDR -> PCIE leg
  double ddr_write_bandwidth = 0.0;        // 0: same as ddr_bandwidth
  double pcie_ram = 2.5 * kMiB;
  double config_time = 16e-3;
  ReadLatencyModel latency{};
  std::uint64_t seed = 1;
  int catch_up_threshold_frames = 2;
  double injected_stall_at_s = -1.0;  // <0: none; else first host read at/after this time
  double injected_stall_duration_s = 0.0;

  double frame_bytes() const { return frame_blocks * block_bytes; }
  double write_bandwidth() const { return ddr_write_bandwidth > 0 ? ddr_write_bandwidth : ddr_bandwidth; }
  // A frame read is admitted only when the FIFO has room for the bytes that
  // arrive while the DDR is locked for the read plus those arriving during
  // the first drain move afterwards; the FIFO peaks mid-move, before the
  // block leaves.
  double read_admit_threshold() const {
    return fifo_capacity -
           ingest_rate * (frame_bytes() / ddr_bandwidth + block_bytes / write_bandwidth()) -
           256.0;
  }
  void validate() const;
};

struct TransferState {
  double clock = 0.0;
  double fifo_fill = 0.0;
  double ddr_backlog = 0.0;
  double pcie_fill = 0.0;
  double ddr_write_addr = 0.0;
  double ddr_read_addr = 0.0;
  bool pcie_busy = false;  // host read in progress
  double produced = 0.0;
  double delivered_bytes = 0.0;
  double lost_bytes = 0.0;
  std::int64_t delivered_frames = 0;
  double max_fifo_fill = 0.0;
  double max_ddr_backlog = 0.0;
};

struct TraceEvent {
  double t = 0.0;
  const char* kind = "";
  double fifo_fill = 0.0;
  double ddr_backlog = 0.0;
  double pcie_fill = 0.0;
};

struct TransferStats {
  double duration = 0.0;
  double produced = 0.0;
  double delivered_bytes = 0.0;
  double lost_bytes = 0.0;
  std::int64_t delivered_frames = 0;
  std::int64_t blocks_written = 0;
  std::int64_t reads_started = 0;
  std::int64_t catch_up_reads = 0;
  std::int64_t timeouts_over_12ms = 0;
  std::int64_t rounds = 0;
  double max_fifo_fill = 0.0;
  double max_ddr_backlog = 0.0;
  bool conservation_ok = true;
  double max_conservation_error = 0.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

class TransferSim {
 public:
  explicit TransferSim(DatapathConfig cfg);

  TransferStats run(double duration_s);

  // Primitive transitions for unit tests; each advances the clock through
  // the transition it performs, with the producer running underneath.
  void advance_to(double t);
  bool step_write_block();  // one FIFO->DDR block move, if its preconditions hold
  bool step_read_frame();   // one DDR->PCIE frame move, if its preconditions hold
  int step_catch_up();      // reads (with typical-latency host drains) until backlog <= 1 frame

  void force_fifo_fill(double bytes);
  void force_ddr_backlog(double bytes);

  const TransferState& state() const { return st_; }
  const DatapathConfig& config() const { return cfg_; }
  bool in_config_window() const { return in_config_; }

  std::vector<TraceEvent>* trace = nullptr;

 private:
  enum class DdrOp { none, write_block, read_frame };

  void record(const char* kind);
  void check_conservation();
  void complete_block_write();
  void complete_frame_read();
  void complete_ipc_read();
  void enter_config();
  bool write_eligible() const;
  bool read_preconditions() const;
  bool read_admitted() const;
  void try_start();
  void start_ipc_read();
  bool ddr_full() const;

  DatapathConfig cfg_;
  TransferState st_;
  std::mt19937_64 rng_;

  DdrOp ddr_op_ = DdrOp::none;
  double ddr_done_t_ = 0.0;
  bool ipc_busy_ = false;
  double ipc_done_t_ = 0.0;
  bool in_config_ = true;
  double config_end_t_ = 0.0;
  bool stall_injected_ = false;
  std::int64_t reads_in_phase_ = 0;

  TransferStats stats_;
};

TransferStats run_simulation(const DatapathConfig& cfg, double duration_s,
                             std::vector<TraceEvent>* trace = nullptr);

// (ddr_capacity + fifo_capacity) / ingest_rate; infinity when nothing is produced.
double max_survivable_stall(const DatapathConfig& cfg);

}  // namespace fmeas
