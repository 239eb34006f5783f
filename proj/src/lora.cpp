// SPDX-License-Identifier: Apache-2.0
#include "bitrom/lora.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "bitrom/error.hpp"

namespace bitrom {

Projection projection_from_name(const std::string& name) {
  if (name == "Q" || name == "Query") return Projection::kQuery;
  if (name == "K" || name == "Key") return Projection::kKey;
  if (name == "V" || name == "Value") return Projection::kValue;
  if (name == "O" || name == "Output") return Projection::kOutput;
  if (name == "G" || name == "Gate") return Projection::kGate;
  if (name == "U" || name == "Up") return Projection::kUp;
  if (name == "D" || name == "Down") return Projection::kDown;
  throw ValidationError("unknown projection name: " + name);
}

std::string projection_name(Projection p) {
  switch (p) {
    case Projection::kQuery: return "Query";
    case Projection::kKey: return "Key";
    case Projection::kValue: return "Value";
    case Projection::kOutput: return "Output";
    case Projection::kGate: return "Gate";
    case Projection::kUp: return "Up";
    case Projection::kDown: return "Down";
  }
  throw InternalError("unreachable projection");
}

ProjDims projection_dims(const ModelConfig& m, Projection p) {
  m.validate();
  const std::int64_t kv_dim = m.kv_heads * m.head_dim;
  switch (p) {
    case Projection::kQuery: return {m.hidden_dim, m.hidden_dim};
    case Projection::kKey: return {m.hidden_dim, kv_dim};
    case Projection::kValue: return {m.hidden_dim, kv_dim};
    case Projection::kOutput: return {m.hidden_dim, m.hidden_dim};
    case Projection::kGate: return {m.hidden_dim, m.ffn_dim};
    case Projection::kUp: return {m.hidden_dim, m.ffn_dim};
    case Projection::kDown: return {m.ffn_dim, m.hidden_dim};
  }
  throw InternalError("unreachable projection");
}

void LoraAdapter::validate() const {
  require(rank >= 1, "LoraAdapter: rank must be >= 1");
  require(bits >= 2 && bits <= 8, "LoraAdapter: bits must be in [2, 8]");
  require(a_codes.cols() == rank && b_codes.rows() == rank,
          "LoraAdapter: code matrices inconsistent with rank");
  require(scale_a >= 0.0 && scale_b >= 0.0,
          "LoraAdapter: scales must be nonnegative");
  const int lo = -(1 << (bits - 1));
  const int hi = (1 << (bits - 1)) - 1;
  const auto in_range = [&](const CodeMatrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (m.data()[i] < lo || m.data()[i] > hi) return false;
    return true;
  };
  require(in_range(a_codes) && in_range(b_codes),
          "LoraAdapter: code outside signed range for bit width");
}

namespace {

// symmetric absmax quantization of one matrix
void quantize_matrix(const Eigen::MatrixXd& m, int bits, CodeMatrix& codes,
                     double& scale) {
  require(m.allFinite(), "quantize_adapter: non-finite input");
  const int qmax = (1 << (bits - 1)) - 1;
  codes.setZero(m.rows(), m.cols());
  scale = 1.0;
  if (m.size() == 0) return;
  const double amax = m.cwiseAbs().maxCoeff();
  if (amax == 0.0) return;
  scale = amax / qmax;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto q = static_cast<int>(std::round(m(i, j) / scale));
      codes(i, j) = static_cast<std::int8_t>(std::clamp(q, -qmax, qmax));
    }
  }
}

}  // namespace

LoraAdapter quantize_adapter(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             int bits, double alpha) {
  require(bits >= 2 && bits <= 8, "quantize_adapter: bits must be in [2, 8]");
  require(a.cols() == b.rows(),
          "quantize_adapter: A cols must equal B rows (the rank)");
  require(a.cols() >= 1, "quantize_adapter: rank must be >= 1");

  LoraAdapter ad;
  ad.rank = static_cast<int>(a.cols());
  ad.bits = bits;
  ad.alpha = alpha < 0.0 ? static_cast<double>(ad.rank) : alpha;
  quantize_matrix(a, bits, ad.a_codes, ad.scale_a);
  quantize_matrix(b, bits, ad.b_codes, ad.scale_b);
  ad.validate();
  return ad;
}

Eigen::VectorXd apply_adapter(const ActivationVector& x, const LoraAdapter& ad,
                              const Eigen::VectorXd& base_out) {
  ad.validate();
  x.validate();
  require(x.bits == 8, "apply_adapter: activations must be 8-bit");
  require(x.values.size() == ad.d_in(),
          "apply_adapter: activation length must equal adapter d_in");
  require(base_out.size() == ad.d_out(),
          "apply_adapter: base output length must equal adapter d_out");

  // integer inner products with 64-bit accumulation; scales applied once
  std::vector<std::int64_t> u(static_cast<std::size_t>(ad.rank), 0);
  for (Eigen::Index i = 0; i < ad.d_in(); ++i) {
    const std::int64_t xi = x.values[i];
    if (xi == 0) continue;
    for (int r = 0; r < ad.rank; ++r)
      u[static_cast<std::size_t>(r)] +=
          static_cast<std::int64_t>(ad.a_codes(i, r)) * xi;
  }

  Eigen::VectorXd out = base_out;
  const double gain = ad.alpha / ad.rank * ad.scale_a * ad.scale_b * x.scale;
  for (Eigen::Index j = 0; j < ad.d_out(); ++j) {
    std::int64_t v = 0;
    for (int r = 0; r < ad.rank; ++r)
      v += u[static_cast<std::size_t>(r)] *
           static_cast<std::int64_t>(ad.b_codes(r, j));
    out[j] += gain * static_cast<double>(v);
  }
  return out;
}

double param_fraction(const AdapterPlacement& place, int rank,
                      const ModelConfig& m) {
  m.validate();
  require(rank >= 0, "param_fraction: rank must be >= 0");
  std::int64_t adapter_params = 0;
  for (const Projection p : place) {
    const ProjDims d = projection_dims(m, p);
    adapter_params += static_cast<std::int64_t>(rank) * (d.d_in + d.d_out);
  }
  adapter_params *= m.layers;
  return 100.0 * static_cast<double>(adapter_params) /
         static_cast<double>(m.param_count);
}

OpFractionReport op_fraction(const AdapterPlacement& place, int rank,
                             const ModelConfig& m) {
  m.validate();
  require(rank >= 0, "op_fraction: rank must be >= 0");
  OpFractionReport report;
  double extra = 0.0, base = 0.0, sum = 0.0;
  for (const Projection p : place) {
    const ProjDims d = projection_dims(m, p);
    const double e = static_cast<double>(rank) *
                     static_cast<double>(d.d_in + d.d_out);
    const double b = static_cast<double>(d.d_in) *
                     static_cast<double>(d.d_out);
    const double frac = 100.0 * e / b;
    report.per_projection[p] = frac;
    extra += e;
    base += b;
    sum += frac;
  }
  if (!place.empty()) {
    report.aggregate_mac_weighted = 100.0 * extra / base;
    report.aggregate_unweighted = sum / static_cast<double>(place.size());
  }
  return report;
}

namespace {

std::size_t packed_row_bytes(Eigen::Index codes, int bits) {
  return (static_cast<std::size_t>(codes) * bits + 7) / 8;
}

void pack_codes(const CodeMatrix& m, int bits,
                std::vector<std::uint8_t>& out) {
  const std::uint32_t mask = (1u << bits) - 1;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const std::size_t row_base = out.size();
    out.resize(row_base + packed_row_bytes(m.cols(), bits), 0);
    std::size_t bit = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const std::uint32_t code = static_cast<std::uint32_t>(m(r, c)) & mask;
      out[row_base + bit / 8] |= static_cast<std::uint8_t>(code << (bit % 8));
      if (bit % 8 + bits > 8)
        out[row_base + bit / 8 + 1] |=
            static_cast<std::uint8_t>(code >> (8 - bit % 8));
      bit += bits;
    }
  }
}

void unpack_codes(const std::uint8_t* data, std::size_t size, int bits,
                  CodeMatrix& m, std::size_t& offset) {
  const int lo_bound = -(1 << (bits - 1));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const std::size_t row_bytes = packed_row_bytes(m.cols(), bits);
    if (offset + row_bytes > size)
      throw CorruptionError("adapter file truncated");
    std::size_t bit = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::uint32_t code = data[offset + bit / 8] >> (bit % 8);
      if (bit % 8 + bits > 8)
        code |= static_cast<std::uint32_t>(data[offset + bit / 8 + 1])
                << (8 - bit % 8);
      code &= (1u << bits) - 1;
      int v = static_cast<int>(code);
      if (v >= (1 << (bits - 1))) v -= 1 << bits;  // sign extend
      if (v < lo_bound) throw CorruptionError("adapter code out of range");
      m(r, c) = static_cast<std::int8_t>(v);
      bit += bits;
    }
    offset += row_bytes;
  }
}

}  // namespace

void write_adapter_file(const std::filesystem::path& path,
                        const LoraAdapter& ad) {
  ad.validate();
  nlohmann::json header = {
      {"version", 1},        {"rank", ad.rank},
      {"d_in", ad.d_in()},   {"d_out", ad.d_out()},
      {"bits", ad.bits},     {"scale_a", ad.scale_a},
      {"scale_b", ad.scale_b}, {"alpha", ad.alpha}};
  const std::string hs = header.dump();

  std::vector<std::uint8_t> payload;
  pack_codes(ad.a_codes, ad.bits, payload);
  pack_codes(ad.b_codes, ad.bits, payload);

  std::ofstream os(path, std::ios::binary);
  require(os.good(), "cannot open adapter file for writing: " + path.string());
  const auto len = static_cast<std::uint32_t>(hs.size());
  for (int i = 0; i < 4; ++i) {
    const char b = static_cast<char>((len >> (8 * i)) & 0xff);
    os.write(&b, 1);
  }
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  os.write(reinterpret_cast<const char*>(payload.data()),
           static_cast<std::streamsize>(payload.size()));
  require(os.good(), "write failed: " + path.string());
}

LoraAdapter read_adapter_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open adapter file: " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
  if (data.size() < 4) throw CorruptionError("adapter file truncated");

  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(data[static_cast<std::size_t>(i)])
           << (8 * i);
  if (data.size() < 4 + static_cast<std::size_t>(len))
    throw CorruptionError("adapter file truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(data.begin() + 4, data.begin() + 4 + len);
  } catch (const nlohmann::json::exception&) {
    throw CorruptionError("adapter file header is not valid JSON");
  }

  LoraAdapter ad;
  try {
    if (header.at("version").get<int>() != 1)
      throw CorruptionError("unsupported adapter file version");
    ad.rank = header.at("rank").get<int>();
    ad.bits = header.at("bits").get<int>();
    ad.scale_a = header.at("scale_a").get<double>();
    ad.scale_b = header.at("scale_b").get<double>();
    ad.alpha = header.at("alpha").get<double>();
    ad.a_codes.setZero(header.at("d_in").get<Eigen::Index>(), ad.rank);
    ad.b_codes.setZero(ad.rank, header.at("d_out").get<Eigen::Index>());
  } catch (const nlohmann::json::exception&) {
    throw CorruptionError("adapter file header missing fields");
  }

  std::size_t offset = 4 + len;
  unpack_codes(data.data(), data.size(), ad.bits, ad.a_codes, offset);
  unpack_codes(data.data(), data.size(), ad.bits, ad.b_codes, offset);
  if (offset != data.size())
    throw CorruptionError("adapter file has trailing bytes");
  ad.validate();
  return ad;
}

}  // namespace bitrom
