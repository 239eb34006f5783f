// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

#include "bitrom/error.hpp"

namespace bitrom {

// KV-cache access simulation works at token granularity: one WRITE when a
// token's K/V pair is produced, one READ of every older token at every
// decode step. Byte volumes are recovered multiplicatively from the layer,
// head and element-width fields, which keeps traces small.
//
// Step/phase convention (this is the convention every reduction figure in
// this module is quoted under):
//   - step 0 is the prefill: the prompt_len prompt tokens are written in a
//     batch and no reads are logged (prefill attention is a parallel
//     on-chip pass, not KV traffic);
//   - decode step t = 1 .. seq_len - prompt_len writes token
//     prompt_len + t - 1 and reads every previously written token.
// Read-reduction denominators therefore count decode reads only. The
// "pure decode" convention used for headline numbers is prompt_len = 1.
struct KvConfig {
  int seq_len = 128;      // n: total tokens, prompt + generated
  int prompt_len = 1;     // p
  int onchip_tokens = 0;  // k: tokens with index < k live in DR eDRAM
  int layers = 1;
  int kv_heads = 1;
  int head_dim = 1;
  int element_bits = 16;
  int batches = 1;
  double tbt_ms = 10.0;  // token-between-token latency
  double tref_ms = 64.0; // DRAM cell retention time

  void validate() const {
    require(seq_len > 0 && prompt_len > 0 && layers > 0 && kv_heads > 0 &&
                head_dim > 0 && element_bits > 0 && batches > 0,
            "KvConfig: counts must be positive");
    require(prompt_len <= seq_len, "KvConfig: prompt_len must be <= seq_len");
    require(onchip_tokens >= 0 && onchip_tokens <= seq_len,
            "KvConfig: onchip_tokens must be in [0, seq_len]");
    require(tbt_ms > 0.0, "KvConfig: tbt_ms must be positive");
    require(tref_ms > 0.0, "KvConfig: tref_ms must be positive");
  }
};

enum class AccessOp : std::uint8_t { kRead = 0, kWrite = 1 };
enum class Location : std::uint8_t { kOnchip = 0, kExternal = 1 };

struct AccessEvent {
  int step = 0;
  int token = 0;
  AccessOp op = AccessOp::kRead;
  Location location = Location::kExternal;

  bool operator==(const AccessEvent&) const = default;
};

struct AccessTrace {
  int seq_len = 0;
  int prompt_len = 0;
  std::vector<AccessEvent> events;  // ordered by step; write first per step
};

struct AccessStats {
  std::uint64_t external_reads = 0;
  std::uint64_t external_writes = 0;
  std::uint64_t onchip_reads = 0;
  std::uint64_t onchip_writes = 0;
  double read_reduction = 0.0;  // vs the k = 0 baseline
};

AccessTrace generate_trace(const KvConfig& c);

// Relabels the trace with the first-k-tokens policy and counts events.
AccessStats apply_policy(const AccessTrace& trace, int onchip_tokens);

// Exact integer counts behind the reduction fraction.
struct ReductionCounts {
  std::uint64_t saved_reads = 0;
  std::uint64_t baseline_reads = 0;
};

// Closed form for the first-k read reduction; for p = 1 this is
// (k*n - k*(k+1)/2) / (n*(n-1)/2).
ReductionCounts reduction_counts_closed_form(int n, int k, int p = 1);
double reduction_closed_form(int n, int k, int p = 1);

struct CurveRow {
  int n = 0;
  int k = 0;
  std::uint64_t external_reads = 0;
  std::uint64_t baseline_reads = 0;
  double reduction = 0.0;
};

// Grid of reductions obtained by enumerating the trace for each n and
// counting per-token reads; rows are ordered by (n, k) and cells with
// k > n are skipped.
std::vector<CurveRow> reduction_curve(const std::vector<int>& n_values,
                                      const std::vector<int>& k_values,
                                      int p = 1);

// A cell retains data as long as consecutive accesses stay closer than
// tref; reads refresh implicitly, so on-chip tokens are valid exactly when
// the per-step gap (= tbt) is strictly below tref.
struct RefreshReport {
  std::map<int, double> max_gap_ms;  // per on-chip token
  std::vector<int> violations;
  bool valid = true;
};

RefreshReport refresh_check(const AccessTrace& trace, const KvConfig& c);

// k tokens * layers * (K and V) * kv_heads * head_dim * element bytes *
// batches.
std::uint64_t edram_capacity_bytes(const KvConfig& c);

void trace_to_jsonl(const AccessTrace& trace, std::ostream& os);

}  // namespace bitrom
