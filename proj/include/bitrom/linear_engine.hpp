// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "bitrom/biroma.hpp"
#include "bitrom/trimla.hpp"
#include "bitrom/types.hpp"

namespace bitrom {

struct ProjectionResult {
  Eigen::VectorX<std::int64_t> outputs;  // one per output channel
  Eigen::VectorXd dequantized;           // outputs * wscale * ascale
  EventLedger ledger;
  bool overflowed = false;
};

// A tensor laid out in BiROMA macros, ready to be driven repeatedly.
struct MappedLayer {
  ArrayGeometry geom;
  WeightMap map;
  double weight_scale = 0.0;
  Eigen::Index in_channels = 0;
  Eigen::Index out_channels = 0;
};

MappedLayer map_layer(const TernaryTensor& t, const ArrayGeometry& g,
                      std::uint32_t start_macro = 0);

// Drives one projection through the mapped array: weights are read back
// from the cells, accumulated `depth` steps at a time in local
// accumulators, and each output channel is closed with adder-tree passes
// over its locals (a single pass when they fit the tree fan-in).
ProjectionResult project(const ActivationVector& a, const MappedLayer& layer,
                         int depth = 16,
                         OverflowPolicy policy = OverflowPolicy::kSaturate,
                         const AdderTreeConfig& tree = {});

ProjectionResult project(const ActivationVector& a, const TernaryTensor& t,
                         const ArrayGeometry& g, int depth = 16,
                         OverflowPolicy policy = OverflowPolicy::kSaturate);

// Independent oracle: naive dot products straight off the tensor with wide
// intermediates. Shares no code with the datapath above.
Eigen::VectorX<std::int64_t> reference_gemm(const ActivationVector& a,
                                            const TernaryTensor& t);

Eigen::VectorXd dequantize(const Eigen::VectorX<std::int64_t>& outputs,
                           double weight_scale, double activation_scale);

}  // namespace bitrom
