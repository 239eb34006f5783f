// SPDX-License-Identifier: Apache-2.0
#include "bitrom/linear_engine.hpp"

#include <vector>

namespace bitrom {

namespace {
constexpr const char* kLayerId = "layer";

int low_nibble(int v) { return v & 0xF; }
int high_nibble(int v) { return (v - (v & 0xF)) / 16; }
}  // namespace

MappedLayer map_layer(const TernaryTensor& t, const ArrayGeometry& g,
                      std::uint32_t start_macro) {
  MappedLayer layer{.geom = g,
                    .map = WeightMap(g),
                    .weight_scale = t.scale,
                    .in_channels = t.rows(),
                    .out_channels = t.cols()};
  layer.map.add_tensor(kLayerId, t, start_macro);
  return layer;
}

ProjectionResult project(const ActivationVector& a, const MappedLayer& layer,
                         int depth, OverflowPolicy policy,
                         const AdderTreeConfig& tree) {
  a.validate();
  require(a.values.size() == layer.in_channels,
          "project: activation length must equal input channels");
  require(depth >= 1, "project: depth must be >= 1");

  const auto& info = layer.map.info(kLayerId);
  const Eigen::Index rows = layer.in_channels;
  const Eigen::Index cols = layer.out_channels;

  ProjectionResult res;
  res.outputs.setZero(cols);
  std::vector<std::int64_t> locals;
  std::vector<std::int64_t> pass(tree.fan_in);
  const LocalAccumulator window{.width_bits = 8, .policy = policy};

  for (Eigen::Index j = 0; j < cols; ++j) {
    locals.clear();
    if (a.bits == 4) {
      LocalAccumulator acc{.width_bits = 8, .policy = policy};
      int steps = 0;
      for (Eigen::Index i = 0; i < rows; ++i) {
        const Trit w = layer.map.tensor_trit(info, i, j);
        accumulate_step(acc, decode_mode(w), a.values[i], res.ledger);
        if (++steps == depth || i + 1 == rows) {
          locals.push_back(acc.value);
          res.overflowed |= acc.overflowed;
          acc = LocalAccumulator{.width_bits = 8, .policy = policy};
          steps = 0;
        }
      }
    } else {
      // 8-bit activations: two bit-serial nibble cycles per local pass
      for (Eigen::Index i0 = 0; i0 < rows; i0 += depth) {
        const Eigen::Index i1 = std::min<Eigen::Index>(i0 + depth, rows);
        LocalAccumulator lo{.width_bits = 31, .policy = policy};
        LocalAccumulator hi{.width_bits = 31, .policy = policy};
        for (Eigen::Index i = i0; i < i1; ++i) {
          const Trit w = layer.map.tensor_trit(info, i, j);
          accumulate_step(lo, decode_mode(w), low_nibble(a.values[i]),
                          res.ledger);
        }
        for (Eigen::Index i = i0; i < i1; ++i) {
          const Trit w = layer.map.tensor_trit(info, i, j);
          accumulate_step(hi, decode_mode(w), high_nibble(a.values[i]),
                          res.ledger);
        }
        res.ledger.bitserial_cycles += 2;
        const std::int64_t combined =
            static_cast<std::int64_t>(hi.value) * 16 + lo.value;
        if (combined < window.min_value() || combined > window.max_value()) {
          res.ledger.overflow_events++;
          res.overflowed = true;
        }
        locals.push_back(combined);
      }
    }

    // one summation per output channel; a tail pass is zero-padded to the
    // tree width
    std::int64_t sum = 0;
    for (std::size_t o = 0; o < locals.size(); o += tree.fan_in) {
      const std::size_t take = std::min<std::size_t>(tree.fan_in,
                                                     locals.size() - o);
      std::fill(pass.begin(), pass.end(), 0);
      std::copy(locals.begin() + static_cast<std::ptrdiff_t>(o),
                locals.begin() + static_cast<std::ptrdiff_t>(o + take),
                pass.begin());
      sum += global_accumulate(pass, tree, res.ledger);
    }
    res.outputs[j] = sum;
  }

  res.dequantized = dequantize(res.outputs, layer.weight_scale, a.scale);
  return res;
}

ProjectionResult project(const ActivationVector& a, const TernaryTensor& t,
                         const ArrayGeometry& g, int depth,
                         OverflowPolicy policy) {
  return project(a, map_layer(t, g), depth, policy);
}

Eigen::VectorX<std::int64_t> reference_gemm(const ActivationVector& a,
                                            const TernaryTensor& t) {
  a.validate();
  t.validate();
  require(a.values.size() == t.rows(),
          "reference_gemm: activation length must equal input channels");
  Eigen::VectorX<std::int64_t> out(t.cols());
  for (Eigen::Index j = 0; j < t.cols(); ++j) {
    std::int64_t sum = 0;
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      sum += static_cast<std::int64_t>(t.trits(i, j)) * a.values[i];
    out[j] = sum;
  }
  return out;
}

Eigen::VectorXd dequantize(const Eigen::VectorX<std::int64_t>& outputs,
                           double weight_scale, double activation_scale) {
  require(weight_scale >= 0.0 && activation_scale >= 0.0,
          "dequantize: scales must be nonnegative");
  return outputs.cast<double>() * (weight_scale * activation_scale);
}

}  // namespace bitrom
