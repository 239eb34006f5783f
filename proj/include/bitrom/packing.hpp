// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bitrom/types.hpp"

namespace bitrom {

// TWO_BIT: 4 trits per byte, codes 00 = 0, 01 = +1, 10 = -1, 11 invalid,
// packed LSB-first (trit i occupies bits [2i, 2i+2) of byte i/4).
// BASE243: 5 trits per byte as base-3 digits (0, +1 -> 1, -1 -> 2), the
// first trit being the least significant digit; every byte is < 243.
enum class TritEncoding : std::uint8_t { kTwoBit = 0, kBase243 = 1 };

struct PackedTritBuffer {
  TritEncoding encoding = TritEncoding::kTwoBit;
  std::vector<std::uint8_t> bytes;
  std::size_t trit_count = 0;
};

PackedTritBuffer pack_trits(std::span<const Trit> trits, TritEncoding enc);

// Throws CorruptionError on invalid codes (TWO_BIT 11, BASE243 byte >= 243
// or nonzero padding digits) or on a byte count inconsistent with
// trit_count.
std::vector<Trit> unpack_trits(const PackedTritBuffer& buf);

std::size_t packed_size(std::size_t trit_count, TritEncoding enc);

// Packed tensor file, little-endian:
//   offset  0: magic "TRIT"
//   offset  4: version (u8, currently 1)
//   offset  5: encoding (u8)
//   offset  6: rows (u32)
//   offset 10: cols (u32)
//   offset 14: reserved (u16, zero)
//   offset 16: scale (IEEE-754 double)
//   offset 24: packed trit bytes, row-major
void write_tensor_file(const std::filesystem::path& path,
                       const TernaryTensor& t, TritEncoding enc);
TernaryTensor read_tensor_file(const std::filesystem::path& path);

}  // namespace bitrom
