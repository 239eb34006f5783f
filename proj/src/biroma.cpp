// SPDX-License-Identifier: Apache-2.0
#include "bitrom/biroma.hpp"

namespace bitrom {

std::uint64_t capacity_trits(const ArrayGeometry& g) {
  g.validate();
  return static_cast<std::uint64_t>(g.rows) * g.cols * g.trits_per_cell;
}

WeightMap::WeightMap(ArrayGeometry g) : geom_(g) { geom_.validate(); }

CellAddress address_from_gslot(const ArrayGeometry& g, std::uint64_t gslot) {
  const std::uint64_t spg = g.slots_per_group();
  const std::uint64_t group = gslot / spg;
  const std::uint64_t q = gslot % spg;
  CellAddress a;
  a.macro = static_cast<std::uint32_t>(group / g.groups_per_macro());
  a.row = static_cast<std::uint32_t>(q / g.slots_per_row_group());
  const auto slot = static_cast<std::uint32_t>(q % g.slots_per_row_group());
  a.col = static_cast<std::uint32_t>(group % g.groups_per_macro()) *
              g.cols_per_trimla +
          slot / 2;
  a.side = static_cast<Side>(slot % 2);
  return a;
}

void WeightMap::add_tensor(const std::string& id, const TernaryTensor& t,
                           std::uint32_t start_macro) {
  t.validate();
  require(!tensors_.count(id), "WeightMap: duplicate tensor id " + id);

  TensorInfo info;
  info.rows = t.rows();
  info.cols = t.cols();
  info.start_group =
      static_cast<std::uint64_t>(start_macro) * geom_.groups_per_macro();
  info.groups_per_channel =
      t.rows() == 0
          ? 1
          : (static_cast<std::uint64_t>(t.rows()) + geom_.slots_per_group() -
             1) /
                geom_.slots_per_group();

  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      const CellAddress a = address_at(
          info, static_cast<std::uint64_t>(i) * t.cols() + j);
      Trit* slot = cell_slot(a);
      require(*slot == kUnsetCell, "WeightMap: cell side assigned twice");
      *slot = t.trits(i, j);
    }
  }
  mapped_trits_ += static_cast<std::uint64_t>(t.size());
  tensors_.emplace(id, info);
}

const WeightMap::TensorInfo& WeightMap::info(const std::string& id) const {
  const auto it = tensors_.find(id);
  require(it != tensors_.end(), "WeightMap: unknown tensor id " + id);
  return it->second;
}

CellAddress WeightMap::address_at(const TensorInfo& info,
                                  std::uint64_t flat) const {
  require(flat < static_cast<std::uint64_t>(info.rows) * info.cols,
          "WeightMap: flat index out of range");
  const std::uint64_t i = flat / info.cols;  // input channel
  const std::uint64_t j = flat % info.cols;  // output channel
  const std::uint64_t spg = geom_.slots_per_group();
  const std::uint64_t group =
      info.start_group + j * info.groups_per_channel + i / spg;
  return address_from_gslot(geom_, group * spg + i % spg);
}

CellAddress WeightMap::address_at(const std::string& id,
                                  std::uint64_t flat) const {
  return address_at(info(id), flat);
}

Trit* WeightMap::cell_slot(const CellAddress& a) {
  if (a.macro >= macros_.size()) macros_.resize(a.macro + 1);
  macros_used_ = std::max(macros_used_, a.macro + 1);
  MacroStore& m = macros_[a.macro];
  if (m.rows.empty()) m.rows.resize(geom_.rows);
  std::vector<Trit>& row = m.rows[a.row];
  if (row.empty()) row.assign(static_cast<std::size_t>(geom_.cols) * 2,
                              kUnsetCell);
  return &row[a.col * 2 + static_cast<std::uint32_t>(a.side)];
}

Trit WeightMap::tensor_trit(const TensorInfo& info, Eigen::Index i,
                            Eigen::Index j) const {
  const CellAddress a =
      address_at(info, static_cast<std::uint64_t>(i) * info.cols + j);
  return cell(a.macro, a.row, a.col, a.side);
}

Trit WeightMap::cell(std::uint32_t macro, std::uint32_t row, std::uint32_t col,
                     Side side) const {
  require(row < geom_.rows, "WeightMap: row out of range");
  require(col < geom_.cols, "WeightMap: col out of range");
  if (macro >= macros_.size()) return 0;
  const MacroStore& m = macros_[macro];
  if (m.rows.empty() || m.rows[row].empty()) return 0;
  const Trit v = m.rows[row][col * 2 + static_cast<std::uint32_t>(side)];
  return v == kUnsetCell ? 0 : v;
}

std::vector<Trit> WeightMap::read_row(std::uint32_t macro, std::uint32_t row,
                                      Side side) const {
  require(row < geom_.rows, "WeightMap: row out of range");
  std::vector<Trit> out(geom_.cols, 0);
  if (macro >= macros_.size()) return out;
  const MacroStore& m = macros_[macro];
  if (m.rows.empty() || m.rows[row].empty()) return out;
  for (std::uint32_t c = 0; c < geom_.cols; ++c) {
    const Trit v = m.rows[row][c * 2 + static_cast<std::uint32_t>(side)];
    out[c] = v == kUnsetCell ? 0 : v;
  }
  return out;
}

nlohmann::json WeightMap::to_json() const {
  nlohmann::json j;
  j["geometry"] = {{"rows", geom_.rows},
                   {"cols", geom_.cols},
                   {"trits_per_cell", geom_.trits_per_cell},
                   {"cols_per_trimla", geom_.cols_per_trimla}};
  auto tensors = nlohmann::json::array();
  for (const auto& [id, info] : tensors_) {
    nlohmann::json t;
    t["id"] = id;
    t["rows"] = info.rows;
    t["cols"] = info.cols;
    t["start_group"] = info.start_group;
    t["groups_per_channel"] = info.groups_per_channel;
    auto runs = nlohmann::json::array();
    const std::uint64_t spg = geom_.slots_per_group();
    std::uint64_t run_start = 0, run_len = 0;
    for (Eigen::Index j2 = 0; j2 < info.cols; ++j2) {
      const std::uint64_t start =
          (info.start_group + j2 * info.groups_per_channel) * spg;
      if (run_len > 0 && start == run_start + run_len) {
        run_len += info.rows;
      } else {
        if (run_len > 0)
          runs.push_back({{"gslot", run_start}, {"len", run_len}});
        run_start = start;
        run_len = info.rows;
      }
    }
    if (run_len > 0) runs.push_back({{"gslot", run_start}, {"len", run_len}});
    t["runs"] = runs;
    tensors.push_back(std::move(t));
  }
  j["tensors"] = tensors;
  return j;
}

WeightMap map_tensor(const TernaryTensor& t, const ArrayGeometry& g,
                     std::uint32_t start_macro) {
  WeightMap m(g);
  m.add_tensor("tensor", t, start_macro);
  return m;
}

double bit_density(const ArrayGeometry& g, double cell_area_um2,
                   double periphery_fraction) {
  g.validate();
  require(cell_area_um2 > 0, "bit_density: cell area must be positive");
  require(periphery_fraction >= 0.0 && periphery_fraction < 1.0,
          "bit_density: periphery_fraction must be in [0, 1)");
  const double bits_per_cell = g.trits_per_cell * kBitsPerTrit;
  // bits/um^2 -> bits/mm^2
  return bits_per_cell / cell_area_um2 * (1.0 - periphery_fraction) * 1e6;
}

double estimate_area_mm2(std::int64_t params, double bits_per_param,
                         const AreaModel& m) {
  m.validate();
  require(params > 0 && bits_per_param > 0,
          "estimate_area_mm2: inputs must be positive");
  const double bits = static_cast<double>(params) * bits_per_param;
  const double scale = m.node_nm / m.ref_node_nm;
  return bits / m.ref_bit_density * scale * scale * m.calibration;
}

}  // namespace bitrom
