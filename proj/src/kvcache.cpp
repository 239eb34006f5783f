// SPDX-License-Identifier: Apache-2.0
#include "bitrom/kvcache.hpp"

#include <algorithm>

#include "json.hpp"

namespace bitrom {

namespace {

Location locate(int token, int onchip_tokens) {
  return token < onchip_tokens ? Location::kOnchip : Location::kExternal;
}

}  // namespace

AccessTrace generate_trace(const KvConfig& c) {
  c.validate();
  AccessTrace trace;
  trace.seq_len = c.seq_len;
  trace.prompt_len = c.prompt_len;

  // prefill: prompt tokens written in a batch at step 0
  for (int tok = 0; tok < c.prompt_len; ++tok)
    trace.events.push_back({0, tok, AccessOp::kWrite,
                            locate(tok, c.onchip_tokens)});

  const int decode_steps = c.seq_len - c.prompt_len;
  for (int t = 1; t <= decode_steps; ++t) {
    const int written = c.prompt_len + t - 1;
    trace.events.push_back({t, written, AccessOp::kWrite,
                            locate(written, c.onchip_tokens)});
    for (int tok = 0; tok < written; ++tok)
      trace.events.push_back({t, tok, AccessOp::kRead,
                              locate(tok, c.onchip_tokens)});
  }
  return trace;
}

AccessStats apply_policy(const AccessTrace& trace, int onchip_tokens) {
  require(onchip_tokens >= 0 && onchip_tokens <= trace.seq_len,
          "apply_policy: onchip_tokens must be in [0, seq_len]");
  AccessStats s;
  std::uint64_t total_reads = 0;
  for (const AccessEvent& e : trace.events) {
    const bool onchip = e.token < onchip_tokens;
    if (e.op == AccessOp::kRead) {
      total_reads++;
      (onchip ? s.onchip_reads : s.external_reads)++;
    } else {
      (onchip ? s.onchip_writes : s.external_writes)++;
    }
  }
  s.read_reduction =
      total_reads == 0
          ? 0.0
          : 1.0 - static_cast<double>(s.external_reads) /
                      static_cast<double>(total_reads);
  return s;
}

ReductionCounts reduction_counts_closed_form(int n, int k, int p) {
  require(n >= 1 && p >= 1 && p <= n, "reduction_counts: bad n/p");
  require(k >= 0 && k <= n, "reduction_counts: k must be in [0, n]");
  const auto d = static_cast<std::uint64_t>(n - p);  // decode steps
  ReductionCounts r;
  // reads at decode step t: p + t - 1, summed over t = 1..d
  r.baseline_reads = d * static_cast<std::uint64_t>(p - 1) + d * (d + 1) / 2;
  const auto kk = static_cast<std::uint64_t>(k);
  const auto pp = static_cast<std::uint64_t>(p);
  const auto nn = static_cast<std::uint64_t>(n);
  if (kk <= pp) {
    // prompt tokens are each read once per decode step
    r.saved_reads = kk * d;
  } else {
    // decode-written token j is read n - 1 - j times
    const std::uint64_t decode_part =
        (kk - pp) * (nn - 1) - (kk * (kk - 1) / 2 - pp * (pp - 1) / 2);
    r.saved_reads = pp * d + decode_part;
  }
  return r;
}

double reduction_closed_form(int n, int k, int p) {
  const ReductionCounts r = reduction_counts_closed_form(n, k, p);
  if (r.baseline_reads == 0) return 0.0;
  return static_cast<double>(r.saved_reads) /
         static_cast<double>(r.baseline_reads);
}

std::vector<CurveRow> reduction_curve(const std::vector<int>& n_values,
                                      const std::vector<int>& k_values,
                                      int p) {
  std::vector<CurveRow> rows;
  for (const int n : n_values) {
    require(p >= 1 && p <= n, "reduction_curve: prompt_len must be in [1, n]");
    KvConfig c;
    c.seq_len = n;
    c.prompt_len = p;
    const AccessTrace trace = generate_trace(c);

    // per-token read counts straight off the enumerated trace
    std::vector<std::uint64_t> reads(static_cast<std::size_t>(n), 0);
    std::uint64_t total = 0;
    for (const AccessEvent& e : trace.events) {
      if (e.op == AccessOp::kRead) {
        reads[static_cast<std::size_t>(e.token)]++;
        total++;
      }
    }
    std::vector<std::uint64_t> prefix(reads.size() + 1, 0);
    for (std::size_t i = 0; i < reads.size(); ++i)
      prefix[i + 1] = prefix[i] + reads[i];

    for (const int k : k_values) {
      if (k > n) continue;
      CurveRow row;
      row.n = n;
      row.k = k;
      row.baseline_reads = total;
      row.external_reads = total - prefix[static_cast<std::size_t>(k)];
      row.reduction = total == 0
                          ? 0.0
                          : 1.0 - static_cast<double>(row.external_reads) /
                                      static_cast<double>(total);
      rows.push_back(row);
    }
  }
  return rows;
}

RefreshReport refresh_check(const AccessTrace& trace, const KvConfig& c) {
  c.validate();
  RefreshReport report;

  // last access step per on-chip token, walked in trace order
  std::map<int, int> last_step;
  std::map<int, int> max_gap_steps;
  for (const AccessEvent& e : trace.events) {
    if (e.token >= c.onchip_tokens) continue;
    const auto it = last_step.find(e.token);
    if (it != last_step.end()) {
      int& gap = max_gap_steps[e.token];
      gap = std::max(gap, e.step - it->second);
      it->second = e.step;
    } else {
      last_step[e.token] = e.step;
      max_gap_steps[e.token] = 0;
    }
  }

  for (const auto& [token, gap] : max_gap_steps) {
    const double gap_ms = gap * c.tbt_ms;
    report.max_gap_ms[token] = gap_ms;
    // retention requires the gap to stay strictly below tref
    if (gap_ms >= c.tref_ms) report.violations.push_back(token);
  }
  report.valid = report.violations.empty();
  return report;
}

std::uint64_t edram_capacity_bytes(const KvConfig& c) {
  c.validate();
  const std::uint64_t bits = static_cast<std::uint64_t>(c.onchip_tokens) *
                             c.layers * 2 * c.kv_heads * c.head_dim *
                             c.element_bits * c.batches;
  return (bits + 7) / 8;
}

void trace_to_jsonl(const AccessTrace& trace, std::ostream& os) {
  for (const AccessEvent& e : trace.events) {
    nlohmann::json j = {
        {"step", e.step},
        {"token", e.token},
        {"op", e.op == AccessOp::kRead ? "read" : "write"},
        {"loc", e.location == Location::kOnchip ? "onchip" : "external"}};
    os << j.dump() << '\n';
  }
}

}  // namespace bitrom
