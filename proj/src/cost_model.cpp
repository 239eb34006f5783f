// SPDX-License-Identifier: Apache-2.0
#include "bitrom/cost_model.hpp"

#include "bitrom/config.hpp"

namespace bitrom {

CostParams load_cost_params(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::parse_file(path);
  CostParams p;
  p.add = kv.get_double_or("add", p.add);
  p.sub = kv.get_double_or("sub", p.sub);
  p.skip = kv.get_double_or("skip", p.skip);
  p.adder_tree_pass_per_fanin =
      kv.get_double_or("adder_tree_pass_per_fanin",
                       p.adder_tree_pass_per_fanin);
  p.edram_read = kv.get_double_or("edram_read", p.edram_read);
  p.edram_write = kv.get_double_or("edram_write", p.edram_write);
  p.dram_read = kv.get_double_or("dram_read", p.dram_read);
  p.dram_write = kv.get_double_or("dram_write", p.dram_write);
  p.validate();
  return p;
}

EnergyBreakdown energy_report(const EventLedger& ledger,
                              const AccessStats& stats, const CostParams& p,
                              std::uint32_t fan_in) {
  p.validate();
  EnergyBreakdown b;
  b.adds = static_cast<double>(ledger.adds) * p.add;
  b.subs = static_cast<double>(ledger.subs) * p.sub;
  b.skips = static_cast<double>(ledger.skips) * p.skip;
  b.adder_tree = static_cast<double>(ledger.adder_tree_passes) *
                 p.adder_tree_pass_per_fanin * fan_in;
  b.datapath_total = b.adds + b.subs + b.skips + b.adder_tree;
  b.edram = static_cast<double>(stats.onchip_reads) * p.edram_read +
            static_cast<double>(stats.onchip_writes) * p.edram_write;
  b.dram = static_cast<double>(stats.external_reads) * p.dram_read +
           static_cast<double>(stats.external_writes) * p.dram_write;
  b.memory_total = b.edram + b.dram;
  b.total = b.datapath_total + b.memory_total;
  b.sparsity_savings = (p.add - p.skip) * static_cast<double>(ledger.skips);
  return b;
}

nlohmann::json to_json(const EnergyBreakdown& b) {
  return {{"adds", b.adds},
          {"subs", b.subs},
          {"skips", b.skips},
          {"adder_tree", b.adder_tree},
          {"datapath_total", b.datapath_total},
          {"edram", b.edram},
          {"dram", b.dram},
          {"memory_total", b.memory_total},
          {"total", b.total},
          {"sparsity_savings", b.sparsity_savings}};
}

SchemeComparison compare_accumulation_schemes(const EventLedger& proposed,
                                              std::uint64_t channel_len,
                                              std::uint32_t fan_in,
                                              const CostParams& p) {
  p.validate();
  require(channel_len >= 1,
          "compare_accumulation_schemes: channel_len must be >= 1");
  SchemeComparison c;
  c.proposed_passes = proposed.adder_tree_passes;
  c.baseline_passes = proposed.adder_tree_passes * channel_len;
  const double per_pass = p.adder_tree_pass_per_fanin * fan_in;
  c.proposed_tree_energy = static_cast<double>(c.proposed_passes) * per_pass;
  c.baseline_tree_energy = static_cast<double>(c.baseline_passes) * per_pass;
  c.ratio = 1.0 / static_cast<double>(channel_len);
  return c;
}

DramEnergy dram_energy(const AccessStats& stats, double bytes_per_event,
                       const CostParams& p) {
  p.validate();
  require(bytes_per_event > 0, "dram_energy: bytes_per_event must be > 0");
  DramEnergy e;
  e.external_read =
      static_cast<double>(stats.external_reads) * p.dram_read * bytes_per_event;
  e.external_write = static_cast<double>(stats.external_writes) *
                     p.dram_write * bytes_per_event;
  e.onchip_read =
      static_cast<double>(stats.onchip_reads) * p.edram_read * bytes_per_event;
  e.onchip_write = static_cast<double>(stats.onchip_writes) * p.edram_write *
                   bytes_per_event;
  e.total = e.external_read + e.external_write + e.onchip_read + e.onchip_write;

  const double total_reads =
      static_cast<double>(stats.external_reads + stats.onchip_reads);
  if (total_reads > 0 && p.dram_read > 0) {
    const double baseline = total_reads * p.dram_read * bytes_per_event;
    const double saved = static_cast<double>(stats.onchip_reads) *
                         (p.dram_read - p.edram_read) * bytes_per_event;
    e.read_savings_fraction = saved / baseline;
  }
  return e;
}

}  // namespace bitrom
