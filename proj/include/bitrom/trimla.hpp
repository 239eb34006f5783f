// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "json.hpp"

#include "bitrom/types.hpp"

namespace bitrom {

// Operating mode decoded from the weight trit: a zero weight gates the
// accumulator off entirely (zero-skip), the sign selects add vs subtract.
enum class TrimlaMode : std::uint8_t { kSkip = 0, kAdd = 1, kSub = 2 };

enum class OverflowPolicy : std::uint8_t { kSaturate = 0, kWrapAndFlag = 1 };

// Datapath event counters feeding the cost model. skips + adds + subs ==
// mac_steps holds after any run; counters only ever increase.
struct EventLedger {
  std::uint64_t mac_steps = 0;
  std::uint64_t skips = 0;
  std::uint64_t adds = 0;
  std::uint64_t subs = 0;
  std::uint64_t adder_tree_passes = 0;
  std::uint64_t bitserial_cycles = 0;
  std::uint64_t overflow_events = 0;

  void merge(const EventLedger& o) {
    mac_steps += o.mac_steps;
    skips += o.skips;
    adds += o.adds;
    subs += o.subs;
    adder_tree_passes += o.adder_tree_passes;
    bitserial_cycles += o.bitserial_cycles;
    overflow_events += o.overflow_events;
  }

  bool operator==(const EventLedger&) const = default;
};

nlohmann::json to_json(const EventLedger& l);

// Sequential accumulator with a configurable output width. Under kSaturate
// the value clamps at the width limits; under kWrapAndFlag it wraps in
// two's complement. The overflow flag is sticky either way.
struct LocalAccumulator {
  int width_bits = 8;
  OverflowPolicy policy = OverflowPolicy::kSaturate;
  std::int32_t value = 0;
  bool overflowed = false;

  std::int32_t min_value() const { return -(1 << (width_bits - 1)); }
  std::int32_t max_value() const { return (1 << (width_bits - 1)) - 1; }
};

TrimlaMode decode_mode(Trit w);

void accumulate_step(LocalAccumulator& acc, TrimlaMode mode, int activation,
                     EventLedger& ledger);

struct MacResult {
  std::int64_t sum = 0;
  bool overflowed = false;
  EventLedger ledger;
};

// Sequential local accumulation of one channel at the given output width;
// the result equals the exact dot product whenever no overflow occurred.
MacResult mac_channel(std::span<const Trit> w, std::span<const int> a,
                      OverflowPolicy policy, int width_bits = 8);

// One adder tree shared by the whole array; locals are summed in a single
// pass per invocation.
struct AdderTreeConfig {
  std::uint32_t fan_in = 128;  // 1024 columns / 8 columns per TriMLA
};

std::int64_t global_accumulate(std::span<const std::int64_t> locals,
                               const AdderTreeConfig& tree,
                               EventLedger& ledger);

// Two-cycle bit-serial handling of 8-bit activations: cycle 1 accumulates
// the low nibble (unsigned, 0..15), cycle 2 the high nibble (signed,
// -8..7), combined as high*16 + low. The nibble cycles run in a wide
// internal register so the combined value is always the exact dot product;
// a combined result outside the accumulator window is surfaced through the
// ledger (overflow_events) rather than clamped, so the 8-bit-sufficiency
// claim stays measurable. Every weight is visited once per cycle, so a
// zero weight contributes two skips.
MacResult mac_bitserial_8b(std::span<const Trit> w, std::span<const int> a,
                           OverflowPolicy policy, int width_bits = 8);

struct OverflowSurvey {
  std::uint64_t trials = 0;
  std::uint64_t overflows = 0;
  double rate = 0.0;
};

// Monte-Carlo overflow rate of one channel pass with i.i.d. symmetric
// ternary weights (P(w != 0) = nonzero_prob) and activations uniform over
// the symmetric quantizer range [-(2^(b-1)-1), 2^(b-1)-1]. Deterministic
// for a fixed seed.
OverflowSurvey overflow_survey(int depth, int act_bits, double nonzero_prob,
                               std::uint64_t trials, std::uint64_t seed);

}  // namespace bitrom
