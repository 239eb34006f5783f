// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "bitrom/types.hpp"

namespace bitrom {

// BiROMA macro geometry. Every ROM cell stores two trits, one on the even
// and one on the odd side of its signal lines; each TriMLA serves a group
// of cols_per_trimla adjacent columns.
struct ArrayGeometry {
  std::uint32_t rows = 2048;
  std::uint32_t cols = 1024;
  std::uint32_t trits_per_cell = 2;
  std::uint32_t cols_per_trimla = 8;

  void validate() const {
    require(rows > 0 && cols > 0 && trits_per_cell > 0 && cols_per_trimla > 0,
            "ArrayGeometry: all counts must be positive");
    require(cols % cols_per_trimla == 0,
            "ArrayGeometry: cols must be divisible by cols_per_trimla");
  }

  std::uint32_t groups_per_macro() const { return cols / cols_per_trimla; }
  // trit slots in one row of one group (both sides of every column)
  std::uint32_t slots_per_row_group() const { return cols_per_trimla * 2; }
  std::uint64_t slots_per_group() const {
    return static_cast<std::uint64_t>(rows) * slots_per_row_group();
  }
};

std::uint64_t capacity_trits(const ArrayGeometry& g);

enum class Side : std::uint8_t { kEven = 0, kOdd = 1 };

struct CellAddress {
  std::uint32_t macro = 0;
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  Side side = Side::kEven;

  bool operator==(const CellAddress&) const = default;
};

// Layout policy (fixed here; the array description leaves it open):
//  - every output channel owns an integral number of consecutive 8-column
//    groups, one TriMLA group per tile;
//  - within a channel, input channels fill a group row by row, consuming
//    the even side of a cell before its odd side (16 inputs per row);
//  - groups wrap across macros, so a tensor that does not fit the macro
//    holding its start group spills into the next one.
//
// The "group-local slot" linearizes this order: channel j's trits occupy
// the contiguous gslot range [start_group*spg + j*n_g*spg, ... + rows of t)
// where spg = slots_per_group and n_g = groups per channel.
class WeightMap {
 public:
  WeightMap() : WeightMap(ArrayGeometry{}) {}
  explicit WeightMap(ArrayGeometry g);

  struct TensorInfo {
    std::uint64_t start_group = 0;
    std::uint64_t groups_per_channel = 1;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
  };

  // Lays the tensor out starting at the first group of start_macro.
  // Throws ValidationError if any target cell side is already assigned.
  void add_tensor(const std::string& id, const TernaryTensor& t,
                  std::uint32_t start_macro);

  const TensorInfo& info(const std::string& id) const;

  // Address of the trit at flat row-major index f (= i * cols + j).
  CellAddress address_at(const TensorInfo& info, std::uint64_t flat) const;
  CellAddress address_at(const std::string& id, std::uint64_t flat) const;

  // Stored trit for tensor element (i, j), read back through the array.
  Trit tensor_trit(const TensorInfo& info, Eigen::Index i,
                   Eigen::Index j) const;

  // Unmapped cells read as 0. Throws ValidationError on out-of-range
  // row/col; macros beyond the mapped region read as all zeros.
  Trit cell(std::uint32_t macro, std::uint32_t row, std::uint32_t col,
            Side side) const;
  std::vector<Trit> read_row(std::uint32_t macro, std::uint32_t row,
                             Side side) const;

  std::uint32_t macros_used() const { return macros_used_; }
  std::uint64_t mapped_trits() const { return mapped_trits_; }
  const ArrayGeometry& geometry() const { return geom_; }

  // {"geometry": ..., "tensors": [{id, rows, cols, runs: [{gslot, len}]}]}
  // with per-channel runs merged when contiguous in gslot order.
  nlohmann::json to_json() const;

 private:
  struct MacroStore {
    // rows[r] is empty until touched, then holds 2*cols entries indexed
    // by col*2 + side; kUnsetCell marks a never-assigned side.
    std::vector<std::vector<Trit>> rows;
  };

  static constexpr Trit kUnsetCell = -2;

  Trit* cell_slot(const CellAddress& a);

  ArrayGeometry geom_;
  std::vector<MacroStore> macros_;
  std::map<std::string, TensorInfo> tensors_;
  std::uint32_t macros_used_ = 0;
  std::uint64_t mapped_trits_ = 0;
};

WeightMap map_tensor(const TernaryTensor& t, const ArrayGeometry& g,
                     std::uint32_t start_macro = 0);

CellAddress address_from_gslot(const ArrayGeometry& g, std::uint64_t gslot);

// Silicon area model. ref_bit_density is the bits/mm^2 figure of merit at
// the reference node; feature-size scaling is quadratic. The density route
// and the published whole-chip areas are not mutually consistent, so an
// explicit calibration factor is exposed instead of being baked in.
struct AreaModel {
  double node_nm = 65.0;
  double ref_node_nm = 65.0;
  double ref_bit_density = 4.967e6;  // bits per mm^2 at ref node
  double periphery_fraction = 0.048;
  double calibration = 1.0;

  void validate() const {
    require(node_nm > 0 && ref_node_nm > 0, "AreaModel: nodes must be > 0");
    require(ref_bit_density > 0, "AreaModel: ref_bit_density must be > 0");
    require(periphery_fraction >= 0.0 && periphery_fraction < 1.0,
            "AreaModel: periphery_fraction must be in [0, 1)");
    require(calibration > 0, "AreaModel: calibration must be > 0");
  }
};

inline constexpr double kBitsPerTrit = 1.58;

// Storage bits per mm^2 for a cell of the given area, derated by the
// fraction of total area spent on periphery (TriMLAs, logic, adder tree).
double bit_density(const ArrayGeometry& g, double cell_area_um2,
                   double periphery_fraction);

double estimate_area_mm2(std::int64_t params, double bits_per_param,
                         const AreaModel& m);

}  // namespace bitrom
