// SPDX-License-Identifier: Apache-2.0
#include "bitrom/packing.hpp"

#include <cstring>
#include <fstream>

#include "bitrom/error.hpp"

namespace bitrom {
namespace {

constexpr std::uint8_t kTwoBitCodes[3] = {2, 0, 1};  // -1, 0, +1

std::uint8_t two_bit_code(Trit t) { return kTwoBitCodes[t + 1]; }

Trit from_two_bit_code(std::uint8_t code) {
  switch (code) {
    case 0: return 0;
    case 1: return +1;
    case 2: return -1;
    default: throw CorruptionError("TWO_BIT buffer contains code 11");
  }
}

std::uint8_t base3_digit(Trit t) { return t == 0 ? 0 : (t == 1 ? 1 : 2); }

Trit from_base3_digit(std::uint8_t d) {
  return d == 0 ? 0 : (d == 1 ? +1 : -1);
}

constexpr std::uint32_t kPow3[6] = {1, 3, 9, 27, 81, 243};

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t packed_size(std::size_t n, TritEncoding enc) {
  return enc == TritEncoding::kTwoBit ? (n + 3) / 4 : (n + 4) / 5;
}

PackedTritBuffer pack_trits(std::span<const Trit> trits, TritEncoding enc) {
  for (const Trit t : trits)
    require(is_trit(t), "pack_trits: input is not a trit");

  PackedTritBuffer buf;
  buf.encoding = enc;
  buf.trit_count = trits.size();
  buf.bytes.assign(packed_size(trits.size(), enc), 0);

  if (enc == TritEncoding::kTwoBit) {
    for (std::size_t i = 0; i < trits.size(); ++i)
      buf.bytes[i / 4] |= two_bit_code(trits[i]) << (2 * (i % 4));
  } else {
    for (std::size_t i = 0; i < trits.size(); ++i)
      buf.bytes[i / 5] += base3_digit(trits[i]) * kPow3[i % 5];
  }
  return buf;
}

std::vector<Trit> unpack_trits(const PackedTritBuffer& buf) {
  if (buf.bytes.size() != packed_size(buf.trit_count, buf.encoding))
    throw CorruptionError("packed buffer size inconsistent with trit_count");

  std::vector<Trit> out(buf.trit_count);
  if (buf.encoding == TritEncoding::kTwoBit) {
    for (std::size_t i = 0; i < buf.trit_count; ++i) {
      const std::uint8_t code = (buf.bytes[i / 4] >> (2 * (i % 4))) & 3;
      out[i] = from_two_bit_code(code);
    }
  } else {
    for (std::size_t b = 0; b < buf.bytes.size(); ++b) {
      std::uint32_t v = buf.bytes[b];
      if (v >= 243) throw CorruptionError("BASE243 byte out of range");
      const std::size_t in_byte =
          std::min<std::size_t>(5, buf.trit_count - b * 5);
      // padding digits of a partial final byte must be zero
      if (v >= kPow3[in_byte])
        throw CorruptionError("BASE243 tail byte has nonzero padding");
      for (std::size_t d = 0; d < in_byte; ++d) {
        out[b * 5 + d] = from_base3_digit(v % 3);
        v /= 3;
      }
    }
  }
  return out;
}

void write_tensor_file(const std::filesystem::path& path,
                       const TernaryTensor& t, TritEncoding enc) {
  t.validate();
  const PackedTritBuffer buf = pack_trits(t.flat(), enc);

  std::vector<std::uint8_t> header;
  header.insert(header.end(), {'T', 'R', 'I', 'T'});
  header.push_back(1);  // version
  header.push_back(static_cast<std::uint8_t>(enc));
  put_u32le(header, static_cast<std::uint32_t>(t.rows()));
  put_u32le(header, static_cast<std::uint32_t>(t.cols()));
  header.push_back(0);  // reserved
  header.push_back(0);

  std::uint64_t scale_bits;
  static_assert(sizeof(scale_bits) == sizeof(t.scale));
  std::memcpy(&scale_bits, &t.scale, sizeof(scale_bits));
  for (int i = 0; i < 8; ++i)
    header.push_back((scale_bits >> (8 * i)) & 0xff);

  std::ofstream os(path, std::ios::binary);
  require(os.good(), "cannot open tensor file for writing: " + path.string());
  os.write(reinterpret_cast<const char*>(header.data()),
           static_cast<std::streamsize>(header.size()));
  os.write(reinterpret_cast<const char*>(buf.bytes.data()),
           static_cast<std::streamsize>(buf.bytes.size()));
  require(os.good(), "write failed: " + path.string());
}

TernaryTensor read_tensor_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open tensor file: " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());

  if (data.size() < 24) throw CorruptionError("tensor file truncated");
  if (std::memcmp(data.data(), "TRIT", 4) != 0)
    throw CorruptionError("tensor file magic mismatch");
  if (data[4] != 1) throw CorruptionError("unsupported tensor file version");
  if (data[5] > 1) throw CorruptionError("unknown trit encoding");

  const auto enc = static_cast<TritEncoding>(data[5]);
  const std::uint32_t rows = get_u32le(&data[6]);
  const std::uint32_t cols = get_u32le(&data[10]);

  std::uint64_t scale_bits = 0;
  for (int i = 0; i < 8; ++i)
    scale_bits |= static_cast<std::uint64_t>(data[16 + i]) << (8 * i);
  double scale;
  std::memcpy(&scale, &scale_bits, sizeof(scale));

  PackedTritBuffer buf;
  buf.encoding = enc;
  buf.trit_count = static_cast<std::size_t>(rows) * cols;
  if (data.size() != 24 + packed_size(buf.trit_count, enc))
    throw CorruptionError("tensor file payload size mismatch");
  buf.bytes.assign(data.begin() + 24, data.end());

  const std::vector<Trit> trits = unpack_trits(buf);
  TernaryTensor t;
  t.trits.resize(rows, cols);
  std::copy(trits.begin(), trits.end(), t.trits.data());
  t.scale = scale;
  t.validate();
  return t;
}

}  // namespace bitrom
