#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fmeas/transfer_sim.hpp"

using namespace fmeas;

TEST_CASE("latency model hits the calibrated quantiles") {
  ReadLatencyModel model;
  std::mt19937_64 rng(1);
  const int n = 1000000;
  double sum = 0.0;
  int over12 = 0, over100 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = sample_read_latency(model, rng);
    sum += v;
    if (v > 12e-3) ++over12;
    if (v > 100e-3) ++over100;
  }
  CHECK(sum / n > 4.5e-3);
  CHECK(sum / n < 5.5e-3);
  CHECK(double(over12) / n > 0.002);
  CHECK(double(over12) / n < 0.004);
  CHECK(double(over100) / n < 1e-4);
}

TEST_CASE("latency model without tail mass never exceeds 12 ms") {
  ReadLatencyModel model;
  model.p_over_12ms = 0.0;
  model.p_over_100ms = 0.0;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100000; ++i) CHECK(sample_read_latency(model, rng) <= 12e-3);
}

TEST_CASE("latency model validation") {
  ReadLatencyModel model;
  model.p_over_100ms = 0.01;  // above P(>12ms)
  CHECK_THROWS_AS(model.validate(), std::invalid_argument);
}

TEST_CASE("block write accounts for the ingest during the move") {
  DatapathConfig cfg;
  TransferSim sim(cfg);
  sim.force_fifo_fill(cfg.block_bytes);
  const double t0 = sim.state().clock;
  REQUIRE(sim.step_write_block());
  // 160 kiB / 500 MiB/s
  CHECK(sim.state().clock - t0 == doctest::Approx(0.0003125).epsilon(1e-12));
  CHECK(sim.state().fifo_fill == doctest::Approx(cfg.ingest_rate * 0.0003125).epsilon(1e-9));
  CHECK(sim.state().ddr_backlog == cfg.block_bytes);
}

TEST_CASE("block write is a no-op on an empty FIFO") {
  TransferSim sim{DatapathConfig{}};
  CHECK_FALSE(sim.step_write_block());
  CHECK(sim.state().ddr_backlog == 0.0);
}

TEST_CASE("write address wraps at the DDR capacity") {
  DatapathConfig cfg;
  cfg.ddr_capacity = 4 * cfg.frame_bytes();
  TransferSim sim(cfg);
  const int blocks_per_wrap = int(cfg.ddr_capacity / cfg.block_bytes);
  for (int i = 0; i < blocks_per_wrap - 1; ++i) {
    sim.force_fifo_fill(cfg.block_bytes);
    REQUIRE(sim.step_write_block());
  }
  // drain one frame so the last writes do not hit a full DDR
  REQUIRE(sim.step_read_frame());
  for (int i = 0; i < 2; ++i) {
    sim.force_fifo_fill(cfg.block_bytes);
    REQUIRE(sim.step_write_block());
  }
  const double expected = std::fmod(double(blocks_per_wrap + 1) * cfg.block_bytes,
                                    cfg.ddr_capacity);
  CHECK(sim.state().ddr_write_addr == doctest::Approx(expected));
  CHECK(sim.state().ddr_read_addr == doctest::Approx(cfg.frame_bytes()));
}

TEST_CASE("addresses track the transferred bytes modulo the DDR capacity") {
  DatapathConfig cfg;
  cfg.ddr_capacity = 2 * cfg.frame_bytes();  // wraps every other frame
  cfg.latency.p_over_12ms = 0.0;
  cfg.latency.p_over_100ms = 0.0;
  TransferSim sim(cfg);
  const auto stats = sim.run(2.0);
  CHECK(stats.lost_bytes == 0.0);
  CHECK(stats.delivered_frames > 30);
  CHECK(sim.state().ddr_write_addr ==
        doctest::Approx(std::fmod(double(stats.blocks_written) * cfg.block_bytes,
                                  cfg.ddr_capacity)));
  // the read address advances at DDR->RAM completion; a frame still in the
  // RAM has been read from the DDR but not yet delivered
  const double completed_reads =
      double(stats.delivered_frames) + (sim.state().pcie_fill > 0.0 ? 1.0 : 0.0);
  CHECK(sim.state().ddr_read_addr ==
        doctest::Approx(std::fmod(completed_reads * cfg.frame_bytes(), cfg.ddr_capacity)));
}

TEST_CASE("frame read accrues one frame of ingest in the FIFO") {
  DatapathConfig cfg;
  TransferSim sim(cfg);
  sim.force_ddr_backlog(cfg.frame_bytes());
  sim.force_fifo_fill(0.0);
  const double t0 = sim.state().clock;
  REQUIRE(sim.step_read_frame());
  CHECK(sim.state().clock - t0 == doctest::Approx(0.005).epsilon(1e-12));  // 2.5 MiB / 500 MiB/s
  // 88 MiB/s * 5 ms = 0.44 MiB
  CHECK(sim.state().fifo_fill == doctest::Approx(0.44 * kMiB).epsilon(1e-9));
  CHECK(sim.state().pcie_fill == cfg.frame_bytes());
  CHECK(sim.state().ddr_backlog == 0.0);
}

TEST_CASE("frame read waits until a full frame is buffered") {
  DatapathConfig cfg;
  TransferSim sim(cfg);
  sim.force_ddr_backlog(cfg.frame_bytes() - 1.0);
  CHECK_FALSE(sim.step_read_frame());
}

TEST_CASE("catch-up drains the backlog to one frame") {
  DatapathConfig cfg;
  TransferSim sim(cfg);
  sim.force_ddr_backlog(5.0 * cfg.frame_bytes());
  CHECK(sim.step_catch_up() == 4);
  CHECK(sim.state().ddr_backlog == doctest::Approx(cfg.frame_bytes()));

  TransferSim idle(cfg);
  idle.force_ddr_backlog(cfg.frame_bytes());
  CHECK(idle.step_catch_up() == 0);
}

TEST_CASE("default run stays lossless with a closed-form FIFO peak") {
  DatapathConfig cfg;
  cfg.latency.p_over_12ms = 0.0;  // no-timeout latency model
  cfg.latency.p_over_100ms = 0.0;
  const auto stats = run_simulation(cfg, 60.0);
  CHECK(stats.lost_bytes == 0.0);
  CHECK(stats.conservation_ok);
  // reads start at the post-block-move residual; the FIFO peaks one block
  // move after the frame read completes
  const double residual = cfg.ingest_rate * cfg.block_bytes / cfg.write_bandwidth();
  const double accrual = cfg.ingest_rate * cfg.frame_bytes() / cfg.ddr_bandwidth;
  CHECK(stats.max_fifo_fill <= cfg.fifo_capacity - 256.0);
  CHECK(stats.max_fifo_fill >= residual + accrual);
  // one frame produced per 2.5 MiB / (88 MiB/s) = 28.4 ms
  const double cycle = cfg.frame_bytes() / cfg.ingest_rate;
  CHECK(cycle == doctest::Approx(28.4e-3).epsilon(0.002));
  CHECK(stats.delivered_frames >= std::int64_t(60.0 / cycle) - 3);
  CHECK(stats.delivered_frames <= std::int64_t(60.0 / cycle));
}

TEST_CASE("run is deterministic per seed") {
  DatapathConfig cfg;
  cfg.seed = 77;
  const auto a = run_simulation(cfg, 30.0);
  const auto b = run_simulation(cfg, 30.0);
  CHECK(a.delivered_frames == b.delivered_frames);
  CHECK(a.max_fifo_fill == b.max_fifo_fill);
  CHECK(a.max_ddr_backlog == b.max_ddr_backlog);
  CHECK(a.timeouts_over_12ms == b.timeouts_over_12ms);
  CHECK(a.lost_bytes == b.lost_bytes);
}

TEST_CASE("a 100 ms stall grows the backlog by 8.8 MiB") {
  DatapathConfig cfg;
  cfg.latency.p_over_12ms = 0.0;
  cfg.latency.p_over_100ms = 0.0;
  cfg.injected_stall_at_s = 5.0;
  cfg.injected_stall_duration_s = 0.1;
  const auto stats = run_simulation(cfg, 20.0);
  CHECK(stats.lost_bytes == 0.0);
  const double growth = cfg.ingest_rate * 0.1;  // 8.8 MiB
  CHECK(stats.max_ddr_backlog >= growth);
  CHECK(stats.max_ddr_backlog <= growth + 3.0 * cfg.frame_bytes());
  CHECK(stats.catch_up_reads > 0);
}

TEST_CASE("a 20 s stall is absorbed; a 30 s stall loses data") {
  DatapathConfig cfg;  // 2 GiB DDR
  cfg.latency.p_over_12ms = 0.0;
  cfg.latency.p_over_100ms = 0.0;
  cfg.injected_stall_at_s = 2.0;
  cfg.injected_stall_duration_s = 20.0;
  const auto ok = run_simulation(cfg, 40.0);
  CHECK(ok.lost_bytes == 0.0);
  CHECK(ok.conservation_ok);

  cfg.injected_stall_duration_s = 30.0;
  const auto bad = run_simulation(cfg, 50.0);
  CHECK(bad.lost_bytes > 0.0);
  CHECK(bad.conservation_ok);  // losses are accounted, not leaked
}

TEST_CASE("survivable stall closed form") {
  DatapathConfig cfg;
  CHECK(max_survivable_stall(cfg) == doctest::Approx(23.28).epsilon(0.005));
  cfg.ddr_capacity = 4.0 * kGiB;
  CHECK(max_survivable_stall(cfg) == doctest::Approx(46.55).epsilon(0.005));
  cfg.ingest_rate = 0.0;
  CHECK(std::isinf(max_survivable_stall(cfg)));
}

TEST_CASE("survivable stall matches a bisection over simulated stalls") {
  DatapathConfig cfg;
  cfg.latency.p_over_12ms = 0.0;
  cfg.latency.p_over_100ms = 0.0;
  cfg.injected_stall_at_s = 2.0;
  double lo = 20.0, hi = 26.0;  // bracket around the closed form
  for (int iter = 0; iter < 12; ++iter) {
    const double mid = 0.5 * (lo + hi);
    cfg.injected_stall_duration_s = mid;
    const auto stats = run_simulation(cfg, mid + 10.0);
    if (stats.lost_bytes > 0.0) hi = mid;
    else lo = mid;
  }
  CHECK(0.5 * (lo + hi) == doctest::Approx(max_survivable_stall(cfg)).epsilon(0.02));
}

TEST_CASE("config validation rejects inconsistent datapaths") {
  DatapathConfig cfg;
  cfg.pcie_ram = 1.0 * kMiB;  // smaller than a frame
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.fifo_capacity = 100.0 * kKiB;  // below the one-frame accrual rule
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
