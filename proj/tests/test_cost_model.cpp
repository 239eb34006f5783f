// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "bitrom/cost_model.hpp"
#include "bitrom/linear_engine.hpp"
#include "bitrom/rng.hpp"

using namespace bitrom;

TEST_CASE("empty ledgers and stats cost nothing") {
  const EnergyBreakdown b = energy_report(EventLedger{}, AccessStats{},
                                          CostParams{});
  CHECK(b.total == 0.0);
  CHECK(b.datapath_total == 0.0);
  CHECK(b.memory_total == 0.0);
  CHECK(b.sparsity_savings == 0.0);
}

TEST_CASE("skip cost equal to add cost removes the sparsity savings") {
  CostParams p;
  p.skip = p.add;
  EventLedger led{.mac_steps = 100, .skips = 40, .adds = 30, .subs = 30};
  CHECK(energy_report(led, AccessStats{}, p).sparsity_savings == 0.0);
}

TEST_CASE("50% sparsity with free skips halves the datapath step energy") {
  // two simulated runs over the same dims, one dense, one half-zero
  TernaryTensor dense, sparse;
  dense.trits = TritMatrix::Constant(32, 4, 1);
  dense.scale = 1.0;
  sparse.trits = TritMatrix::Constant(32, 4, 1);
  for (Eigen::Index i = 0; i < sparse.trits.rows(); i += 2)
    sparse.trits.row(i).setZero();
  sparse.scale = 1.0;

  ActivationVector a;
  a.bits = 4;
  a.values = Eigen::VectorXi::Constant(32, 1);
  a.scale = 1.0;

  const ProjectionResult dense_run = project(a, dense, ArrayGeometry{});
  const ProjectionResult sparse_run = project(a, sparse, ArrayGeometry{});

  CostParams p;
  p.skip = 0.0;
  p.adder_tree_pass_per_fanin = 0.0;
  const EnergyBreakdown eb_dense =
      energy_report(dense_run.ledger, AccessStats{}, p);
  const EnergyBreakdown eb_sparse =
      energy_report(sparse_run.ledger, AccessStats{}, p);
  CHECK(eb_sparse.datapath_total ==
        doctest::Approx(eb_dense.datapath_total / 2).epsilon(1e-12));
}

TEST_CASE("energy is linear in counters and weights") {
  Xoshiro256StarStar rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    EventLedger led{.mac_steps = 0,
                    .skips = rng.next_below(1000),
                    .adds = rng.next_below(1000),
                    .subs = rng.next_below(1000),
                    .adder_tree_passes = rng.next_below(50),
                    .bitserial_cycles = 0,
                    .overflow_events = 0};
    led.mac_steps = led.skips + led.adds + led.subs;
    AccessStats st{.external_reads = rng.next_below(1000),
                   .external_writes = rng.next_below(100),
                   .onchip_reads = rng.next_below(1000),
                   .onchip_writes = rng.next_below(100),
                   .read_reduction = 0.0};
    CostParams p;
    const EnergyBreakdown b = energy_report(led, st, p);
    CHECK(b.total >= 0.0);

    CostParams doubled = p;
    doubled.add *= 2;
    doubled.sub *= 2;
    doubled.skip *= 2;
    doubled.adder_tree_pass_per_fanin *= 2;
    doubled.edram_read *= 2;
    doubled.edram_write *= 2;
    doubled.dram_read *= 2;
    doubled.dram_write *= 2;
    const EnergyBreakdown b2 = energy_report(led, st, doubled);
    CHECK(b2.total == doctest::Approx(2 * b.total).epsilon(1e-12));

    EventLedger led2 = led;
    led2.merge(led);
    const EnergyBreakdown b3 = energy_report(led2, st, p);
    CHECK(b3.datapath_total ==
          doctest::Approx(2 * b.datapath_total).epsilon(1e-12));
  }
}

TEST_CASE("scheme comparison follows the single-summation pass count") {
  CostParams p;
  EventLedger led{.adder_tree_passes = 10};

  SUBCASE("channel length one is the degenerate equality case") {
    const SchemeComparison c = compare_accumulation_schemes(led, 1, 128, p);
    CHECK(c.ratio == 1.0);
    CHECK(c.baseline_passes == c.proposed_passes);
  }
  SUBCASE("length 16 cuts tree energy sixteenfold") {
    const SchemeComparison c = compare_accumulation_schemes(led, 16, 128, p);
    CHECK(c.ratio == doctest::Approx(1.0 / 16).epsilon(1e-12));
    CHECK(c.baseline_passes == 160);
    CHECK(c.proposed_tree_energy ==
          doctest::Approx(c.baseline_tree_energy / 16).epsilon(1e-12));
  }
  SUBCASE("proposed never exceeds baseline, equality only at length 1") {
    for (const std::uint64_t len : {1ull, 2ull, 16ull, 2048ull}) {
      const SchemeComparison c = compare_accumulation_schemes(led, len, 128, p);
      CHECK(c.proposed_passes <= c.baseline_passes);
      if (len > 1) CHECK(c.proposed_passes < c.baseline_passes);
    }
  }
  CHECK_THROWS_AS(compare_accumulation_schemes(led, 0, 128, p),
                  ValidationError);
}

TEST_CASE("dram energy breakdown") {
  CostParams p;
  SUBCASE("all-external stats have zero on-chip energy") {
    AccessStats st{.external_reads = 100, .external_writes = 10,
                   .onchip_reads = 0, .onchip_writes = 0,
                   .read_reduction = 0.0};
    const DramEnergy e = dram_energy(st, 64.0, p);
    CHECK(e.onchip_read == 0.0);
    CHECK(e.onchip_write == 0.0);
    CHECK(e.read_savings_fraction == 0.0);
  }
  SUBCASE("the published read reduction propagates when DRAM dominates") {
    // 43.6% of reads served on-chip
    AccessStats st{.external_reads = 5640, .external_writes = 0,
                   .onchip_reads = 4360, .onchip_writes = 0,
                   .read_reduction = 0.436};
    CostParams dominant = p;
    dominant.dram_read = 1e6;
    dominant.edram_read = 1.0;
    const DramEnergy e = dram_energy(st, 64.0, dominant);
    CHECK(e.read_savings_fraction == doctest::Approx(0.436).epsilon(1e-3));
  }
  SUBCASE("doubling the weights doubles the totals") {
    AccessStats st{.external_reads = 123, .external_writes = 45,
                   .onchip_reads = 678, .onchip_writes = 90,
                   .read_reduction = 0.0};
    const DramEnergy e1 = dram_energy(st, 64.0, p);
    CostParams doubled = p;
    doubled.dram_read *= 2;
    doubled.dram_write *= 2;
    doubled.edram_read *= 2;
    doubled.edram_write *= 2;
    const DramEnergy e2 = dram_energy(st, 64.0, doubled);
    CHECK(e2.total == doctest::Approx(2 * e1.total).epsilon(1e-12));
  }
}

TEST_CASE("cost params validate the zero-skip bound") {
  CostParams p;
  p.skip = p.add + 1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = CostParams{};
  p.dram_read = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("cost params load from a key = value file") {
  const auto path =
      std::filesystem::temp_directory_path() / "bitrom_test_cost.cfg";
  {
    std::ofstream os(path);
    os << "# relative units\n"
       << "add = 2.0\n"
       << "skip = 0.5\n"
       << "dram_read = 250\n";
  }
  const CostParams p = load_cost_params(path);
  CHECK(p.add == 2.0);
  CHECK(p.skip == 0.5);
  CHECK(p.dram_read == 250.0);
  CHECK(p.sub == 1.0);  // default retained
  std::filesystem::remove(path);
}
