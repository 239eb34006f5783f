// SPDX-License-Identifier: Apache-2.0
#include "bitrom/pipeline.hpp"

#include <cmath>

#include "bitrom/quantize.hpp"
#include "bitrom/rng.hpp"

namespace bitrom {

PartitionPlan build_partition_plan(int layers, int partitions) {
  require(layers >= 1 && partitions >= 1,
          "build_partition_plan: counts must be >= 1");
  require(layers % partitions == 0,
          "build_partition_plan: layers must be divisible by partitions");
  PartitionPlan plan;
  plan.partitions = partitions;
  plan.layers_per_partition = layers / partitions;
  plan.assignment.resize(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l)
    plan.assignment[static_cast<std::size_t>(l)] =
        l / plan.layers_per_partition;
  return plan;
}

PipelineSchedule simulate_pipeline(const PartitionPlan& plan, int batches,
                                   int steps) {
  require(batches >= 1, "simulate_pipeline: batches must be >= 1");
  require(steps >= 0, "simulate_pipeline: steps must be >= 0");
  const int P = plan.partitions;
  const int T = std::max(batches, P);  // schedule period

  PipelineSchedule sched;
  sched.partitions = P;
  sched.batches = batches;
  sched.steps = steps;
  sched.occupancy.assign(static_cast<std::size_t>(steps),
                         std::vector<int>(static_cast<std::size_t>(P), -1));
  for (int t = 0; t < steps; ++t) {
    for (int s = 0; s < P; ++s) {
      if (t < s) continue;  // stage not reached during fill
      const int b = (t - s) % T;
      if (b < batches) sched.occupancy[static_cast<std::size_t>(t)]
                                      [static_cast<std::size_t>(s)] = b;
    }
  }

  // occupancy fraction over the steady window once the pipeline is full
  const int warmup = std::min(P - 1, steps);
  std::uint64_t busy = 0;
  const int window = steps - warmup;
  for (int t = warmup; t < steps; ++t)
    for (int s = 0; s < P; ++s)
      busy += sched.occupancy[static_cast<std::size_t>(t)]
                             [static_cast<std::size_t>(s)] >= 0;
  sched.utilization =
      window <= 0 ? 0.0
                  : static_cast<double>(busy) /
                        (static_cast<double>(window) * P);
  return sched;
}

// ----------------------------------------------------------------------

namespace {

Eigen::MatrixXd random_matrix(Xoshiro256StarStar& rng, Eigen::Index rows,
                              Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.next_symmetric();
  return m;
}

MappedLayer random_layer(Xoshiro256StarStar& rng, Eigen::Index d_in,
                         Eigen::Index d_out) {
  return map_layer(quantize_weights_ternary(random_matrix(rng, d_in, d_out)),
                   ArrayGeometry{});
}

Eigen::VectorXd rms_norm(const Eigen::VectorXd& v) {
  const double ms = v.squaredNorm() / std::max<double>(1, v.size());
  return v / std::sqrt(ms + 1e-6);
}

Eigen::VectorXd silu(const Eigen::VectorXd& v) {
  return v.array() / (1.0 + (-v.array()).exp());
}

std::optional<LoraAdapter> maybe_adapter(
    const std::optional<std::string>& path, Eigen::Index d_in,
    Eigen::Index d_out) {
  if (!path) return std::nullopt;
  LoraAdapter ad = read_adapter_file(*path);
  require(ad.d_in() == d_in && ad.d_out() == d_out,
          "adapter dimensions do not match the projection: " + *path);
  return ad;
}

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

ToyModel ToyModel::build(const ScenarioConfig& config) {
  config.validate();
  ToyModel m;
  m.config = config;
  Xoshiro256StarStar rng(config.seed);

  const Eigen::Index hidden = config.model.hidden_dim;
  const Eigen::Index kv_dim = config.model.kv_heads * config.model.head_dim;
  const Eigen::Index ffn = config.model.ffn_dim;
  const Eigen::Index vocab = config.vocab;

  m.embedding = random_matrix(rng, vocab, hidden);
  for (std::int64_t l = 0; l < config.model.layers; ++l) {
    ToyLayer layer;
    layer.wq = random_layer(rng, hidden, hidden);
    layer.wk = random_layer(rng, hidden, kv_dim);
    layer.wv = random_layer(rng, hidden, kv_dim);
    layer.wo = random_layer(rng, hidden, hidden);
    layer.wgate = random_layer(rng, hidden, ffn);
    layer.wup = random_layer(rng, hidden, ffn);
    layer.wdown = random_layer(rng, ffn, hidden);
    layer.adapter_value = maybe_adapter(config.adapter_value, hidden, kv_dim);
    layer.adapter_output =
        maybe_adapter(config.adapter_output, hidden, hidden);
    layer.adapter_down = maybe_adapter(config.adapter_down, ffn, hidden);
    m.layers.push_back(std::move(layer));
  }
  m.lm_head = random_layer(rng, hidden, vocab);
  return m;
}

ToyModelState make_state(const ToyModel& model) {
  ToyModelState st;
  st.keys.resize(static_cast<std::size_t>(model.config.model.layers));
  st.values.resize(static_cast<std::size_t>(model.config.model.layers));
  return st;
}

namespace {

// Quantize, project through the datapath, dequantize; optionally add a
// LoRA contribution computed from the same quantized activations.
Eigen::VectorXd projected(const Eigen::VectorXd& x, const MappedLayer& layer,
                          const std::optional<LoraAdapter>& adapter,
                          const ScenarioConfig& cfg, EventLedger& ledger) {
  const ActivationVector a = quantize_activations(x, cfg.act_bits);
  ProjectionResult r = project(a, layer, cfg.depth, cfg.policy);
  ledger.merge(r.ledger);
  if (adapter) return apply_adapter(a, *adapter, r.dequantized);
  return r.dequantized;
}

}  // namespace

int decode_step(const ToyModel& model, ToyModelState& state, int token,
                EventLedger& ledger) {
  const ScenarioConfig& cfg = model.config;
  require(token >= 0 && token < cfg.vocab, "decode_step: token out of range");

  const int heads = static_cast<int>(cfg.model.heads);
  const int kv_heads = static_cast<int>(cfg.model.kv_heads);
  const int head_dim = static_cast<int>(cfg.model.head_dim);
  const int rep = heads / kv_heads;  // grouped-query replication

  Eigen::VectorXd x = model.embedding.row(token).transpose();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const ToyLayer& layer = model.layers[l];

    // attention block
    const Eigen::VectorXd h = rms_norm(x);
    const Eigen::VectorXd q =
        projected(h, layer.wq, std::nullopt, cfg, ledger);
    const Eigen::VectorXd k =
        projected(h, layer.wk, std::nullopt, cfg, ledger);
    const Eigen::VectorXd v =
        projected(h, layer.wv, layer.adapter_value, cfg, ledger);
    state.keys[l].push_back(k);
    state.values[l].push_back(v);

    const auto cached = static_cast<Eigen::Index>(state.keys[l].size());
    Eigen::VectorXd ctx(heads * head_dim);
    for (int hd = 0; hd < heads; ++hd) {
      const int g = hd / rep;
      const Eigen::VectorXd qh = q.segment(hd * head_dim, head_dim);

      Eigen::VectorXd scores(cached);
      for (Eigen::Index s = 0; s < cached; ++s)
        scores[s] = qh.dot(state.keys[l][static_cast<std::size_t>(s)].segment(
                        g * head_dim, head_dim)) /
                    std::sqrt(static_cast<double>(head_dim));
      const double mx = scores.maxCoeff();
      Eigen::VectorXd weights = (scores.array() - mx).exp();
      weights /= weights.sum();

      Eigen::VectorXd acc = Eigen::VectorXd::Zero(head_dim);
      for (Eigen::Index s = 0; s < cached; ++s)
        acc += weights[s] *
               state.values[l][static_cast<std::size_t>(s)].segment(
                   g * head_dim, head_dim);
      ctx.segment(hd * head_dim, head_dim) = acc;
    }
    x += projected(ctx, layer.wo, layer.adapter_output, cfg, ledger);

    // MLP block
    const Eigen::VectorXd h2 = rms_norm(x);
    const Eigen::VectorXd gate =
        projected(h2, layer.wgate, std::nullopt, cfg, ledger);
    const Eigen::VectorXd up =
        projected(h2, layer.wup, std::nullopt, cfg, ledger);
    const Eigen::VectorXd mlp_in = silu(gate).cwiseProduct(up);
    x += projected(mlp_in, layer.wdown, layer.adapter_down, cfg, ledger);
  }

  const Eigen::VectorXd logits =
      projected(rms_norm(x), model.lm_head, std::nullopt, cfg, ledger);
  return argmax_lowest(logits);
}

RunReport run_sequence(const ToyModel& model) {
  const ScenarioConfig& cfg = model.config;
  const int n = cfg.seq_len;
  const int p = cfg.prompt_len;
  const int k = cfg.onchip_tokens;

  RunReport report;
  report.trace.seq_len = n;
  report.trace.prompt_len = p;
  ToyModelState state = make_state(model);

  const auto locate = [&](int token) {
    return token < k ? Location::kOnchip : Location::kExternal;
  };

  // prefill: fixed prompt, one forward pass per token; writes land at
  // step 0 and intra-prefill attention reads are not logged as KV traffic
  int next = 0;
  for (int i = 0; i < p; ++i) {
    const int token = i % cfg.vocab;
    state.tokens.push_back(token);
    next = decode_step(model, state, token, report.ledger);
    report.trace.events.push_back(
        {0, i, AccessOp::kWrite, locate(i)});
  }

  for (int t = 1; t <= n - p; ++t) {
    const int written = p + t - 1;
    state.tokens.push_back(next);
    report.trace.events.push_back(
        {t, written, AccessOp::kWrite, locate(written)});
    for (int tok = 0; tok < written; ++tok)
      report.trace.events.push_back(
          {t, tok, AccessOp::kRead, locate(tok)});
    next = decode_step(model, state, next, report.ledger);
  }

  // each layer must have cached exactly one K/V pair per token
  for (const auto& kl : state.keys)
    if (kl.size() != static_cast<std::size_t>(n))
      throw InternalError("per-layer KV count diverged from token count");

  report.tokens = state.tokens;
  report.stats = apply_policy(report.trace, k);

  KvConfig kv;
  kv.seq_len = n;
  kv.prompt_len = p;
  kv.onchip_tokens = k;
  kv.layers = static_cast<int>(cfg.model.layers);
  kv.kv_heads = static_cast<int>(cfg.model.kv_heads);
  kv.head_dim = static_cast<int>(cfg.model.head_dim);
  kv.element_bits = cfg.element_bits;
  kv.batches = cfg.batches;
  kv.tbt_ms = cfg.tbt_ms;
  kv.tref_ms = cfg.tref_ms;
  report.refresh = refresh_check(report.trace, kv);

  const PartitionPlan plan =
      build_partition_plan(static_cast<int>(cfg.model.layers), cfg.partitions);
  const int steps = std::max(n, 4 * cfg.partitions);
  report.utilization =
      simulate_pipeline(plan, cfg.batches, steps).utilization;
  return report;
}

}  // namespace bitrom
