// SPDX-License-Identifier: Apache-2.0
#include "bitrom/trimla.hpp"

#include <vector>

#include "bitrom/rng.hpp"

namespace bitrom {

nlohmann::json to_json(const EventLedger& l) {
  return {{"mac_steps", l.mac_steps},
          {"skips", l.skips},
          {"adds", l.adds},
          {"subs", l.subs},
          {"adder_tree_passes", l.adder_tree_passes},
          {"bitserial_cycles", l.bitserial_cycles},
          {"overflow_events", l.overflow_events}};
}

TrimlaMode decode_mode(Trit w) {
  require(is_trit(w), "decode_mode: input is not a trit");
  if (w == 0) return TrimlaMode::kSkip;
  return w > 0 ? TrimlaMode::kAdd : TrimlaMode::kSub;
}

void accumulate_step(LocalAccumulator& acc, TrimlaMode mode, int activation,
                     EventLedger& ledger) {
  ledger.mac_steps++;
  if (mode == TrimlaMode::kSkip) {
    ledger.skips++;
    return;
  }
  if (mode == TrimlaMode::kAdd) {
    ledger.adds++;
  } else {
    ledger.subs++;
  }
  const std::int64_t raw =
      static_cast<std::int64_t>(acc.value) +
      (mode == TrimlaMode::kAdd ? activation : -activation);
  const std::int64_t lo = acc.min_value();
  const std::int64_t hi = acc.max_value();
  if (raw < lo || raw > hi) {
    ledger.overflow_events++;
    acc.overflowed = true;
    if (acc.policy == OverflowPolicy::kSaturate) {
      acc.value = static_cast<std::int32_t>(raw < lo ? lo : hi);
    } else {
      const std::int64_t span = hi - lo + 1;
      std::int64_t wrapped = (raw - lo) % span;
      if (wrapped < 0) wrapped += span;
      acc.value = static_cast<std::int32_t>(wrapped + lo);
    }
  } else {
    acc.value = static_cast<std::int32_t>(raw);
  }
}

MacResult mac_channel(std::span<const Trit> w, std::span<const int> a,
                      OverflowPolicy policy, int width_bits) {
  require(w.size() == a.size(), "mac_channel: length mismatch");
  MacResult r;
  LocalAccumulator acc{.width_bits = width_bits, .policy = policy};
  for (std::size_t i = 0; i < w.size(); ++i)
    accumulate_step(acc, decode_mode(w[i]), a[i], r.ledger);
  r.sum = acc.value;
  r.overflowed = acc.overflowed;
  return r;
}

std::int64_t global_accumulate(std::span<const std::int64_t> locals,
                               const AdderTreeConfig& tree,
                               EventLedger& ledger) {
  require(tree.fan_in >= 1, "global_accumulate: fan_in must be >= 1");
  require(locals.size() == tree.fan_in,
          "global_accumulate: expected exactly fan_in locals");
  std::int64_t sum = 0;
  for (const std::int64_t v : locals) sum += v;
  ledger.adder_tree_passes++;
  return sum;
}

namespace {

int low_nibble(int v) { return v & 0xF; }
int high_nibble(int v) { return (v - (v & 0xF)) / 16; }

}  // namespace

MacResult mac_bitserial_8b(std::span<const Trit> w, std::span<const int> a,
                           OverflowPolicy policy, int width_bits) {
  require(w.size() == a.size(), "mac_bitserial_8b: length mismatch");
  for (const int v : a)
    require(v >= -128 && v <= 127,
            "mac_bitserial_8b: activation outside 8-bit range");

  MacResult r;
  // wide internal shift-accumulate registers; exactness is checked against
  // the declared output width below
  LocalAccumulator lo{.width_bits = 31, .policy = policy};
  LocalAccumulator hi{.width_bits = 31, .policy = policy};
  for (std::size_t i = 0; i < w.size(); ++i)
    accumulate_step(lo, decode_mode(w[i]), low_nibble(a[i]), r.ledger);
  for (std::size_t i = 0; i < w.size(); ++i)
    accumulate_step(hi, decode_mode(w[i]), high_nibble(a[i]), r.ledger);
  r.ledger.bitserial_cycles += 2;

  r.sum = static_cast<std::int64_t>(hi.value) * 16 + lo.value;
  const LocalAccumulator window{.width_bits = width_bits, .policy = policy};
  if (r.sum < window.min_value() || r.sum > window.max_value()) {
    r.ledger.overflow_events++;
    r.overflowed = true;
  }
  return r;
}

OverflowSurvey overflow_survey(int depth, int act_bits, double nonzero_prob,
                               std::uint64_t trials, std::uint64_t seed) {
  require(depth >= 1, "overflow_survey: depth must be >= 1");
  require(act_bits == 4 || act_bits == 8,
          "overflow_survey: act_bits must be 4 or 8");
  require(nonzero_prob >= 0.0 && nonzero_prob <= 1.0,
          "overflow_survey: nonzero_prob must be in [0, 1]");
  require(trials > 0, "overflow_survey: trials must be > 0");

  Xoshiro256StarStar rng(seed);
  const int qmax = ActivationVector::qmax(act_bits);
  std::vector<Trit> w(depth);
  std::vector<int> a(depth);

  OverflowSurvey s;
  s.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (int i = 0; i < depth; ++i) {
      if (rng.next_unit() < nonzero_prob) {
        w[i] = rng.next_below(2) == 0 ? Trit{1} : Trit{-1};
      } else {
        w[i] = 0;
      }
      a[i] = static_cast<int>(rng.next_int(-qmax, qmax));
    }
    const MacResult r =
        act_bits == 4 ? mac_channel(w, a, OverflowPolicy::kSaturate)
                      : mac_bitserial_8b(w, a, OverflowPolicy::kSaturate);
    s.overflows += r.overflowed ? 1 : 0;
  }
  s.rate = static_cast<double>(s.overflows) / static_cast<double>(s.trials);
  return s;
}

}  // namespace bitrom
