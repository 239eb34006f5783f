// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>
#include <vector>

#include "bitrom/kvcache.hpp"

using namespace bitrom;

namespace {

KvConfig cfg(int n, int p, int k) {
  KvConfig c;
  c.seq_len = n;
  c.prompt_len = p;
  c.onchip_tokens = k;
  return c;
}

std::uint64_t count_reads(const AccessTrace& t) {
  std::uint64_t r = 0;
  for (const auto& e : t.events) r += e.op == AccessOp::kRead;
  return r;
}

std::uint64_t count_writes(const AccessTrace& t) {
  return t.events.size() - count_reads(t);
}

}  // namespace

TEST_CASE("smallest trace: one prefill write, one decode write + read") {
  const AccessTrace t = generate_trace(cfg(2, 1, 0));
  REQUIRE(t.events.size() == 3);
  CHECK(t.events[0] == AccessEvent{0, 0, AccessOp::kWrite, Location::kExternal});
  CHECK(t.events[1] == AccessEvent{1, 1, AccessOp::kWrite, Location::kExternal});
  CHECK(t.events[2] == AccessEvent{1, 0, AccessOp::kRead, Location::kExternal});
}

TEST_CASE("n=4, p=1 accumulates 1+2+3 reads") {
  const AccessTrace t = generate_trace(cfg(4, 1, 0));
  CHECK(count_reads(t) == 6);
  CHECK(count_writes(t) == 4);
}

TEST_CASE("every token is written exactly once and read at every later step") {
  const int n = 128, p = 5;
  const AccessTrace t = generate_trace(cfg(n, p, 0));
  std::vector<int> writes(n, 0);
  std::vector<std::uint64_t> reads(n, 0);
  for (const auto& e : t.events) {
    if (e.op == AccessOp::kWrite)
      writes[static_cast<std::size_t>(e.token)]++;
    else
      reads[static_cast<std::size_t>(e.token)]++;
  }
  for (int tok = 0; tok < n; ++tok) CHECK(writes[tok] == 1);

  // token 0 is read once per decode step
  CHECK(reads[0] == static_cast<std::uint64_t>(n - p));

  // seniority: earlier tokens are read at least as often
  for (int tok = 1; tok < n; ++tok) CHECK(reads[tok - 1] >= reads[tok]);
}

TEST_CASE("policy extremes") {
  const AccessTrace t = generate_trace(cfg(64, 1, 0));
  CHECK(apply_policy(t, 0).read_reduction == 0.0);

  const AccessStats full = apply_policy(t, 64);
  CHECK(full.external_reads == 0);
  CHECK(full.read_reduction == 1.0);
}

TEST_CASE("headline point: n=128, k=32 lands on the published reduction") {
  const AccessStats s = apply_policy(generate_trace(cfg(128, 1, 0)), 32);
  CHECK(s.read_reduction == doctest::Approx(0.436).epsilon(0.035));
  CHECK(std::abs(s.read_reduction - 0.436) < 0.015);
  // exact counts under the pure-decode convention
  CHECK(s.external_reads == 4560);
  CHECK(s.external_reads + s.onchip_reads == 8128);
}

TEST_CASE("closed form equals trace enumeration") {
  for (const int p : {1, 2, 5}) {
    for (int n = p; n <= 64; ++n) {
      const AccessTrace t = generate_trace(cfg(n, p, 0));
      const std::uint64_t baseline = count_reads(t);
      for (int k = 0; k <= n; ++k) {
        const AccessStats s = apply_policy(t, k);
        const ReductionCounts c = reduction_counts_closed_form(n, k, p);
        CHECK(c.baseline_reads == baseline);
        CHECK(c.saved_reads == s.onchip_reads);
      }
    }
  }
}

TEST_CASE("quarter-token rule lands between 40% and 47%") {
  for (const int n : {32, 64, 128, 256}) {
    const double r = reduction_closed_form(n, n / 4, 1);
    CHECK(r >= 0.40);
    CHECK(r <= 0.47);
  }
}

TEST_CASE("curve is monotone nondecreasing in k and zero at k=0") {
  const std::vector<int> n_values{32, 64, 128, 256};
  std::vector<int> k_values;
  for (int k = 0; k <= 64; k += 4) k_values.push_back(k);
  const auto rows = reduction_curve(n_values, k_values, 1);

  double prev = -1.0;
  int prev_n = -1;
  for (const CurveRow& r : rows) {
    if (r.n != prev_n) {
      prev = -1.0;
      prev_n = r.n;
    }
    CHECK(r.reduction >= prev);
    if (r.k == 0) CHECK(r.reduction == 0.0);
    prev = r.reduction;
  }
}

TEST_CASE("curve rows agree with apply_policy") {
  const auto rows = reduction_curve({96}, {0, 8, 24, 96}, 1);
  const AccessTrace t = generate_trace(cfg(96, 1, 0));
  for (const CurveRow& r : rows) {
    const AccessStats s = apply_policy(t, r.k);
    CHECK(r.external_reads == s.external_reads);
    CHECK(r.reduction == s.read_reduction);
  }
}

TEST_CASE("refresh validity is strict in tbt < tref") {
  KvConfig c = cfg(8, 1, 4);

  SUBCASE("comfortably fast decoding is valid") {
    c.tbt_ms = 10.0;
    const RefreshReport r = refresh_check(generate_trace(c), c);
    CHECK(r.valid);
    CHECK(r.violations.empty());
    // every on-chip token is touched once per step
    for (const auto& [token, gap] : r.max_gap_ms) CHECK(gap == 10.0);
  }
  SUBCASE("slow decoding violates for every on-chip token") {
    c.tbt_ms = 100.0;
    const RefreshReport r = refresh_check(generate_trace(c), c);
    CHECK_FALSE(r.valid);
    CHECK(r.violations.size() == 4);
  }
  SUBCASE("the boundary case is rejected") {
    c.tbt_ms = 64.0;
    CHECK_FALSE(refresh_check(generate_trace(c), c).valid);
  }
  SUBCASE("just below the boundary is accepted") {
    c.tbt_ms = 63.999;
    CHECK(refresh_check(generate_trace(c), c).valid);
  }
}

TEST_CASE("on-chip tokens never wait longer than one decode step") {
  KvConfig c = cfg(200, 7, 50);
  const RefreshReport r = refresh_check(generate_trace(c), c);
  for (const auto& [token, gap] : r.max_gap_ms) CHECK(gap <= c.tbt_ms);
}

TEST_CASE("eDRAM capacity reproduces the published 13.5 MiB point") {
  KvConfig c;
  c.seq_len = 128;
  c.prompt_len = 1;
  c.onchip_tokens = 32;
  c.layers = 18;
  c.kv_heads = 4;
  c.head_dim = 256;
  c.element_bits = 16;
  c.batches = 6;
  CHECK(edram_capacity_bytes(c) == 14155776);
  CHECK(edram_capacity_bytes(c) == 13.5 * 1024 * 1024);

  SUBCASE("no on-chip tokens needs no eDRAM") {
    c.onchip_tokens = 0;
    CHECK(edram_capacity_bytes(c) == 0);
  }
  SUBCASE("bytes are linear in batches") {
    KvConfig d = c;
    d.batches = 12;
    CHECK(edram_capacity_bytes(d) == 2 * edram_capacity_bytes(c));
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(generate_trace(cfg(4, 5, 0)), ValidationError);
  CHECK_THROWS_AS(generate_trace(cfg(4, 1, 5)), ValidationError);
  KvConfig c = cfg(4, 1, 0);
  c.tbt_ms = 0.0;
  CHECK_THROWS_AS(generate_trace(c), ValidationError);
  const AccessTrace t = generate_trace(cfg(4, 1, 0));
  CHECK_THROWS_AS(apply_policy(t, 5), ValidationError);
}

TEST_CASE("trace JSONL export is one event per line") {
  const AccessTrace t = generate_trace(cfg(3, 1, 1));
  std::ostringstream os;
  trace_to_jsonl(t, os);
  std::istringstream is(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line)) {
    ++lines;
    CHECK(line.find("\"step\"") != std::string::npos);
  }
  CHECK(lines == t.events.size());
}
