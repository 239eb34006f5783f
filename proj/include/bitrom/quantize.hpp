// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>

#include "bitrom/types.hpp"

namespace bitrom {

// Rounding convention throughout the quantizers: round-half-away-from-zero
// (std::round), fixed for reproducibility.

// Absmean ternarization: gamma = mean(|W|), trit = clamp(round(W/gamma)).
// The all-zero matrix quantizes to all-zero trits with scale 0.
template <typename Derived>
TernaryTensor quantize_weights_ternary(const Eigen::MatrixBase<Derived>& w) {
  const Eigen::MatrixXd m = w.derived().template cast<double>();
  require(m.allFinite(), "quantize_weights_ternary: non-finite input");

  TernaryTensor t;
  t.trits.setZero(m.rows(), m.cols());
  if (m.size() == 0) return t;

  const double gamma = m.cwiseAbs().mean();
  if (gamma == 0.0) return t;  // all-zero input

  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double q = std::round(m(i, j) / gamma);
      t.trits(i, j) = static_cast<Trit>(std::clamp(q, -1.0, 1.0));
    }
  }
  t.scale = gamma;
  return t;
}

// Symmetric per-vector absmax quantization to `bits`-wide signed integers.
// The zero vector maps to all-zero values with scale 1.
template <typename Derived>
ActivationVector quantize_activations(const Eigen::MatrixBase<Derived>& x,
                                      int bits) {
  require(bits == 4 || bits == 8, "quantize_activations: bits must be 4 or 8");
  const Eigen::VectorXd v = x.derived().template cast<double>();
  require(v.allFinite(), "quantize_activations: non-finite input");

  ActivationVector a;
  a.bits = bits;
  a.values.setZero(v.size());
  if (v.size() == 0) return a;

  const int qmax = ActivationVector::qmax(bits);
  const double amax = v.cwiseAbs().maxCoeff();
  if (amax == 0.0) return a;  // scale stays 1

  a.scale = amax / qmax;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto q = static_cast<int>(std::round(v[i] / a.scale));
    a.values[i] = std::clamp(q, -qmax, qmax);
  }
  return a;
}

// Fraction of zero-valued trits.
inline double sparsity(const TernaryTensor& t) {
  if (t.size() == 0) return 0.0;
  Eigen::Index zeros = 0;
  for (const Trit v : t.flat()) zeros += (v == 0);
  return static_cast<double>(zeros) / static_cast<double>(t.size());
}

}  // namespace bitrom
