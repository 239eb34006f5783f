// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace bitrom {

inline constexpr std::string_view kToolName = "bitrom-sim";
inline constexpr std::string_view kVersion = "0.1.0";

// FNV-1a, used to stamp reports with a hash of the resolved configuration.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace bitrom
