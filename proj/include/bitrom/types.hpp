// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>

#include "bitrom/error.hpp"

namespace bitrom {

// A ternary digit, one of {-1, 0, +1}.
using Trit = std::int8_t;

inline bool is_trit(int v) { return v == -1 || v == 0 || v == 1; }

// Row-major so a tensor can also be viewed as a flat trit stream.
using TritMatrix =
    Eigen::Matrix<Trit, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Ternary weight matrix with its absmean scale. Rows index input channels,
// columns index output channels. scale == 0 only for the all-zero tensor.
struct TernaryTensor {
  TritMatrix trits;
  double scale = 0.0;

  Eigen::Index rows() const { return trits.rows(); }
  Eigen::Index cols() const { return trits.cols(); }
  Eigen::Index size() const { return trits.size(); }

  std::span<const Trit> flat() const {
    return {trits.data(), static_cast<std::size_t>(trits.size())};
  }

  void validate() const {
    require(scale >= 0.0, "TernaryTensor: scale must be nonnegative");
    bool any_nonzero = false;
    for (Eigen::Index i = 0; i < trits.size(); ++i) {
      require(is_trit(trits.data()[i]), "TernaryTensor: entry is not a trit");
      any_nonzero |= trits.data()[i] != 0;
    }
    require(!(any_nonzero && scale == 0.0),
            "TernaryTensor: nonzero tensor with zero scale");
  }
};

// Signed fixed-width integer activations with a per-vector scale.
struct ActivationVector {
  int bits = 8;  // 4 or 8
  Eigen::VectorXi values;
  double scale = 1.0;

  static int qmax(int bits) { return (1 << (bits - 1)) - 1; }
  static int qmin(int bits) { return -(1 << (bits - 1)); }

  void validate() const {
    require(bits == 4 || bits == 8, "ActivationVector: bits must be 4 or 8");
    require(scale > 0.0, "ActivationVector: scale must be positive");
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      require(values[i] >= qmin(bits) && values[i] <= qmax(bits),
              "ActivationVector: value out of range for bit width");
    }
  }
};

// Transformer dimension set used for counting, mapping and capacity math.
struct ModelConfig {
  std::string name;
  std::int64_t layers = 0;
  std::int64_t hidden_dim = 0;
  std::int64_t ffn_dim = 0;
  std::int64_t heads = 0;
  std::int64_t kv_heads = 0;
  std::int64_t head_dim = 0;
  std::int64_t param_count = 0;

  void validate() const {
    require(layers > 0 && hidden_dim > 0 && ffn_dim > 0 && heads > 0 &&
                kv_heads > 0 && head_dim > 0 && param_count > 0,
            "ModelConfig: all counts must be positive");
    require(head_dim * heads == hidden_dim,
            "ModelConfig: head_dim * heads must equal hidden_dim");
    require(kv_heads <= heads, "ModelConfig: kv_heads must not exceed heads");
  }
};

}  // namespace bitrom
