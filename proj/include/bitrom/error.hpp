// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bitrom {

// Bad caller input: mismatched dimensions, out-of-range parameters,
// unparseable configuration. The CLI maps this to exit code 3.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed serialized data: invalid trit codes, truncated files.
class CorruptionError : public std::runtime_error {
 public:
  explicit CorruptionError(const std::string& msg) : std::runtime_error(msg) {}
};

// A broken internal invariant. The CLI maps this to exit code 4.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace bitrom
