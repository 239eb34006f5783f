// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "bitrom/types.hpp"

namespace bitrom {

enum class Projection {
  kQuery,
  kKey,
  kValue,
  kOutput,
  kGate,
  kUp,
  kDown,
};

Projection projection_from_name(const std::string& name);
std::string projection_name(Projection p);

using AdapterPlacement = std::set<Projection>;

struct ProjDims {
  std::int64_t d_in = 0;
  std::int64_t d_out = 0;
};

ProjDims projection_dims(const ModelConfig& m, Projection p);

using CodeMatrix =
    Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rank-r additive adapter: y = base + alpha/r * B.A.x, with A and B held
// as symmetric-absmax quantized integer codes and the scales applied after
// the integer inner products.
struct LoraAdapter {
  int rank = 16;
  int bits = 6;
  CodeMatrix a_codes;  // d_in x rank
  CodeMatrix b_codes;  // rank x d_out
  double scale_a = 1.0;
  double scale_b = 1.0;
  double alpha = 16.0;

  Eigen::Index d_in() const { return a_codes.rows(); }
  Eigen::Index d_out() const { return b_codes.cols(); }
  void validate() const;
};

// alpha < 0 selects the neutral default alpha = rank.
LoraAdapter quantize_adapter(const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b, int bits = 6,
                             double alpha = -1.0);

// x must be an 8-bit ActivationVector of length d_in; returns
// base_out + alpha/r * dequant(B) (dequant(A) dequant(x)) computed with
// integer inner products and the scales applied at the end.
Eigen::VectorXd apply_adapter(const ActivationVector& x, const LoraAdapter& ad,
                              const Eigen::VectorXd& base_out);

// Adapter parameters as a percentage of total model parameters:
// sum over layers and placed projections of r*(d_in + d_out) / params.
double param_fraction(const AdapterPlacement& place, int rank,
                      const ModelConfig& m);

struct OpFractionReport {
  std::map<Projection, double> per_projection;  // percent
  double aggregate_mac_weighted = 0.0;
  double aggregate_unweighted = 0.0;
};

// Extra adapter MACs relative to the base projection MACs, per projection
// r*(d_in + d_out) / (d_in * d_out). The aggregate is reported both
// MAC-weighted and as a plain mean over the placement.
OpFractionReport op_fraction(const AdapterPlacement& place, int rank,
                             const ModelConfig& m);

// Adapter file: u32 LE header length, JSON header (version, rank, d_in,
// d_out, bits, scale_a, scale_b, alpha), then A and B codes packed `bits`
// wide LSB-first, each matrix row padded to a byte boundary.
void write_adapter_file(const std::filesystem::path& path,
                        const LoraAdapter& ad);
LoraAdapter read_adapter_file(const std::filesystem::path& path);

}  // namespace bitrom
