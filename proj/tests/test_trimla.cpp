// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "bitrom/rng.hpp"
#include "bitrom/trimla.hpp"

using namespace bitrom;

TEST_CASE("mode decode follows the truth table") {
  CHECK(decode_mode(0) == TrimlaMode::kSkip);
  CHECK(decode_mode(+1) == TrimlaMode::kAdd);
  CHECK(decode_mode(-1) == TrimlaMode::kSub);
  CHECK_THROWS_AS(decode_mode(2), ValidationError);
}

TEST_CASE("accumulate_step semantics") {
  EventLedger led;
  LocalAccumulator acc;

  accumulate_step(acc, TrimlaMode::kAdd, 5, led);
  CHECK(acc.value == 5);
  CHECK(led.adds == 1);
  CHECK(led.mac_steps == 1);

  accumulate_step(acc, TrimlaMode::kSkip, 7, led);
  CHECK(acc.value == 5);
  CHECK(led.skips == 1);
  CHECK(led.mac_steps == 2);

  accumulate_step(acc, TrimlaMode::kSub, 3, led);
  CHECK(acc.value == 2);
  CHECK(led.subs == 1);
  CHECK(led.skips + led.adds + led.subs == led.mac_steps);
}

TEST_CASE("saturation clamps and sets the sticky flag") {
  EventLedger led;
  LocalAccumulator acc;
  acc.value = -126;
  accumulate_step(acc, TrimlaMode::kSub, 7, led);
  CHECK(acc.value == -128);
  CHECK(acc.overflowed);
  CHECK(led.overflow_events == 1);

  // flag stays set even after the value recovers
  accumulate_step(acc, TrimlaMode::kAdd, 10, led);
  CHECK(acc.value == -118);
  CHECK(acc.overflowed);
}

TEST_CASE("wrap policy wraps in two's complement and flags") {
  EventLedger led;
  LocalAccumulator acc{.policy = OverflowPolicy::kWrapAndFlag};
  acc.value = -126;
  accumulate_step(acc, TrimlaMode::kSub, 7, led);
  CHECK(acc.value == 123);  // -133 + 256
  CHECK(acc.overflowed);
  CHECK(led.overflow_events == 1);
}

TEST_CASE("mac_channel forced cases") {
  const std::vector<Trit> w{+1, -1, 0};
  const std::vector<int> a{3, 5, 7};
  const MacResult r = mac_channel(w, a, OverflowPolicy::kSaturate);
  CHECK(r.sum == -2);
  CHECK(r.ledger.skips == 1);
  CHECK(r.ledger.adds == 1);
  CHECK(r.ledger.subs == 1);
  CHECK_FALSE(r.overflowed);

  const std::vector<Trit> zeros(5, 0);
  const std::vector<int> acts{1, 2, 3, 4, 5};
  const MacResult rz = mac_channel(zeros, acts, OverflowPolicy::kSaturate);
  CHECK(rz.sum == 0);
  CHECK(rz.ledger.skips == 5);

  CHECK_THROWS_AS(mac_channel(w, acts, OverflowPolicy::kSaturate),
                  ValidationError);
}

TEST_CASE("mac_channel equals the brute-force dot product") {
  Xoshiro256StarStar rng(21);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto len = static_cast<std::size_t>(rng.next_int(1, 16));
    std::vector<Trit> w(len);
    std::vector<int> a(len);
    std::int64_t expect = 0;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < len; ++i) {
      w[i] = static_cast<Trit>(rng.next_int(-1, 1));
      a[i] = static_cast<int>(rng.next_int(-7, 7));
      expect += static_cast<std::int64_t>(w[i]) * a[i];
      zeros += w[i] == 0;
    }
    const MacResult r = mac_channel(w, a, OverflowPolicy::kSaturate);
    CHECK_FALSE(r.overflowed);  // |sum| <= 112 at length 16
    CHECK(r.sum == expect);
    CHECK(r.ledger.skips == zeros);
    CHECK(r.ledger.skips + r.ledger.adds + r.ledger.subs ==
          r.ledger.mac_steps);
  }
}

TEST_CASE("global_accumulate sums exactly and counts one pass") {
  EventLedger led;
  const AdderTreeConfig tree;
  std::vector<std::int64_t> ones(128, 1);
  CHECK(global_accumulate(ones, tree, led) == 128);
  CHECK(led.adder_tree_passes == 1);

  std::vector<std::int64_t> zeros(128, 0);
  CHECK(global_accumulate(zeros, tree, led) == 0);
  CHECK(led.adder_tree_passes == 2);

  Xoshiro256StarStar rng(22);
  std::vector<std::int64_t> vals(128);
  std::int64_t expect = 0;
  for (auto& v : vals) {
    v = rng.next_int(-1000000, 1000000);
    expect += v;
  }
  CHECK(global_accumulate(vals, tree, led) == expect);

  std::vector<std::int64_t> wrong(100, 1);
  CHECK_THROWS_AS(global_accumulate(wrong, tree, led), ValidationError);
}

TEST_CASE("bit-serial nibble decomposition") {
  SUBCASE("0xFF splits into high -1, low 15") {
    const std::vector<Trit> w{+1};
    const std::vector<int> a{-1};
    const MacResult r = mac_bitserial_8b(w, a, OverflowPolicy::kSaturate);
    CHECK(r.sum == -1);
    CHECK(r.ledger.bitserial_cycles == 2);
  }
  SUBCASE("single-term check") {
    const std::vector<Trit> w{-1};
    const std::vector<int> a{16};
    CHECK(mac_bitserial_8b(w, a, OverflowPolicy::kSaturate).sum == -16);
  }
}

TEST_CASE("bit-serial equals the direct dot product exhaustively at length 1") {
  for (int v = -128; v <= 127; ++v) {
    for (int wv = -1; wv <= 1; ++wv) {
      const std::vector<Trit> w{static_cast<Trit>(wv)};
      const std::vector<int> a{v};
      const MacResult r = mac_bitserial_8b(w, a, OverflowPolicy::kSaturate);
      CHECK(r.sum == static_cast<std::int64_t>(wv) * v);
    }
  }
}

TEST_CASE("bit-serial equals the direct dot product on random channels") {
  Xoshiro256StarStar rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto len = static_cast<std::size_t>(rng.next_int(2, 64));
    std::vector<Trit> w(len);
    std::vector<int> a(len);
    std::int64_t expect = 0;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < len; ++i) {
      w[i] = static_cast<Trit>(rng.next_int(-1, 1));
      a[i] = static_cast<int>(rng.next_int(-128, 127));
      expect += static_cast<std::int64_t>(w[i]) * a[i];
      zeros += w[i] == 0;
    }
    const MacResult r = mac_bitserial_8b(w, a, OverflowPolicy::kSaturate);
    CHECK(r.sum == expect);
    // one skip per zero-weight visit per cycle
    CHECK(r.ledger.skips == 2 * zeros);
    CHECK(r.ledger.mac_steps == 2 * len);
  }
}

TEST_CASE("bit-serial surfaces output-window violations without corrupting "
          "the value") {
  const std::vector<Trit> w(32, +1);
  const std::vector<int> a(32, 127);
  const MacResult r = mac_bitserial_8b(w, a, OverflowPolicy::kSaturate);
  CHECK(r.sum == 32 * 127);
  CHECK(r.overflowed);
  CHECK(r.ledger.overflow_events == 1);
}

TEST_CASE("overflow survey") {
  SUBCASE("a single term cannot overflow") {
    CHECK(overflow_survey(1, 4, 1.0, 1000, 1).rate == 0.0);
    CHECK(overflow_survey(1, 8, 1.0, 1000, 1).rate == 0.0);
  }
  SUBCASE("depth 16 at 4 bits is structurally safe") {
    // max |partial| = 16 * 7 = 112 < 128
    CHECK(overflow_survey(16, 4, 0.5, 10000, 2).rate == 0.0);
  }
  SUBCASE("depth 2048 overflows often") {
    CHECK(overflow_survey(2048, 4, 0.5, 2000, 3).rate > 0.01);
  }
  SUBCASE("fixed seed gives identical results") {
    const OverflowSurvey a = overflow_survey(64, 4, 0.3, 5000, 42);
    const OverflowSurvey b = overflow_survey(64, 4, 0.3, 5000, 42);
    CHECK(a.overflows == b.overflows);
    CHECK(a.rate == b.rate);
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(overflow_survey(0, 4, 0.5, 10, 0), ValidationError);
    CHECK_THROWS_AS(overflow_survey(1, 5, 0.5, 10, 0), ValidationError);
    CHECK_THROWS_AS(overflow_survey(1, 4, 1.5, 10, 0), ValidationError);
    CHECK_THROWS_AS(overflow_survey(1, 4, 0.5, 0, 0), ValidationError);
  }
}

TEST_CASE("ledger merge adds counters elementwise") {
  EventLedger a{.mac_steps = 3, .skips = 1, .adds = 1, .subs = 1,
                .adder_tree_passes = 2, .bitserial_cycles = 4,
                .overflow_events = 1};
  const EventLedger b = a;
  a.merge(b);
  CHECK(a.mac_steps == 6);
  CHECK(a.adder_tree_passes == 4);
  CHECK(a.bitserial_cycles == 8);
  CHECK(a.overflow_events == 2);

  const nlohmann::json j = to_json(a);
  CHECK(j["mac_steps"] == 6);
  CHECK(j["skips"] == 2);
}
