// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "json.hpp"

#include "bitrom/kvcache.hpp"
#include "bitrom/trimla.hpp"

namespace bitrom {

// Per-event energy weights in arbitrary relative units. No absolute
// efficiency figure is modeled; only ratios between runs are meaningful.
struct CostParams {
  double add = 1.0;
  double sub = 1.0;
  double skip = 0.05;
  double adder_tree_pass_per_fanin = 0.1;  // per pass, times the fan-in
  double edram_read = 2.0;
  double edram_write = 2.0;
  double dram_read = 100.0;
  double dram_write = 100.0;

  void validate() const {
    for (const double v : {add, sub, skip, adder_tree_pass_per_fanin,
                           edram_read, edram_write, dram_read, dram_write})
      require(v >= 0.0, "CostParams: weights must be nonnegative");
    require(skip <= add, "CostParams: skip cost must not exceed add cost");
  }
};

CostParams load_cost_params(const std::filesystem::path& path);

struct EnergyBreakdown {
  double adds = 0.0;
  double subs = 0.0;
  double skips = 0.0;
  double adder_tree = 0.0;
  double datapath_total = 0.0;
  double edram = 0.0;
  double dram = 0.0;
  double memory_total = 0.0;
  double total = 0.0;
  double sparsity_savings = 0.0;  // (add - skip) * skips
};

EnergyBreakdown energy_report(const EventLedger& ledger,
                              const AccessStats& stats, const CostParams& p,
                              std::uint32_t fan_in = 128);

nlohmann::json to_json(const EnergyBreakdown& b);

// Baseline digital CiROM flow pays one adder-tree pass per MAC step; the
// local-then-global flow pays one per channel. With channel length L the
// tree energy ratio is 1/L.
struct SchemeComparison {
  std::uint64_t proposed_passes = 0;
  std::uint64_t baseline_passes = 0;
  double proposed_tree_energy = 0.0;
  double baseline_tree_energy = 0.0;
  double ratio = 0.0;
};

SchemeComparison compare_accumulation_schemes(const EventLedger& proposed,
                                              std::uint64_t channel_len,
                                              std::uint32_t fan_in,
                                              const CostParams& p);

struct DramEnergy {
  double external_read = 0.0;
  double external_write = 0.0;
  double onchip_read = 0.0;
  double onchip_write = 0.0;
  double total = 0.0;
  // fraction of the all-external read energy saved by the on-chip policy
  double read_savings_fraction = 0.0;
};

DramEnergy dram_energy(const AccessStats& stats, double bytes_per_event,
                       const CostParams& p);

}  // namespace bitrom
