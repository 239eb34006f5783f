// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "bitrom/config.hpp"
#include "bitrom/kvcache.hpp"
#include "bitrom/linear_engine.hpp"
#include "bitrom/lora.hpp"

namespace bitrom {

// Contiguous-block layer-to-partition assignment.
struct PartitionPlan {
  int partitions = 6;
  int layers_per_partition = 3;
  std::vector<int> assignment;  // layer index -> partition index
};

PartitionPlan build_partition_plan(int layers, int partitions);

// Modulo pipeline: with period T = max(batches, partitions), batch
// (t - s) mod T occupies stage s at step t once it has entered. Utilization
// is measured over the steady window after the fill and equals
// min(batches, partitions) / partitions there.
struct PipelineSchedule {
  int partitions = 0;
  int batches = 0;
  int steps = 0;
  std::vector<std::vector<int>> occupancy;  // [step][partition], -1 = idle
  double utilization = 0.0;
};

PipelineSchedule simulate_pipeline(const PartitionPlan& plan, int batches,
                                   int steps);

// ----------------------------------------------------------------------
// Toy-scale functional decode loop. Linear projections run through the
// ternary datapath; embeddings, norms, attention softmax and the MLP
// activation run in double precision (the auxiliary-processor role).

struct ToyLayer {
  MappedLayer wq, wk, wv, wo, wgate, wup, wdown;
  std::optional<LoraAdapter> adapter_value;
  std::optional<LoraAdapter> adapter_output;
  std::optional<LoraAdapter> adapter_down;
};

struct ToyModel {
  ScenarioConfig config;
  std::vector<ToyLayer> layers;
  Eigen::MatrixXd embedding;  // vocab x hidden
  MappedLayer lm_head;

  // Weights are drawn from the scenario seed and ternarized; adapters are
  // loaded from the files named in the scenario, when present.
  static ToyModel build(const ScenarioConfig& config);
};

struct ToyModelState {
  std::vector<int> tokens;
  // per layer, one K/V vector (kv_heads * head_dim) per cached token
  std::vector<std::vector<Eigen::VectorXd>> keys;
  std::vector<std::vector<Eigen::VectorXd>> values;
};

ToyModelState make_state(const ToyModel& model);

// Forward pass of one token: appends K/V for every layer, merges datapath
// events into `ledger`, returns the argmax next token (ties break to the
// lowest index).
int decode_step(const ToyModel& model, ToyModelState& state, int token,
                EventLedger& ledger);

struct RunReport {
  std::vector<int> tokens;
  AccessTrace trace;
  AccessStats stats;
  RefreshReport refresh;
  EventLedger ledger;
  double utilization = 0.0;
};

// End-to-end decode with KV accounting. The live trace follows the same
// token-granularity convention as generate_trace: prompt writes land in
// step 0 with no logged reads, each decode step logs one write plus reads
// of all older tokens (the current token's fresh K/V stays in registers).
RunReport run_sequence(const ToyModel& model);

}  // namespace bitrom
