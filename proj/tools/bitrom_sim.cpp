// SPDX-License-Identifier: Apache-2.0
//
// Scenario runner: exposes the quantizer, the mapped-array linear engine,
// the KV-cache sweeps, the area/overhead estimators and the toy decode loop
// from the command line. Reports are deterministic for identical
// (arguments, config, seed); CSV output carries a header row and a trailing
// metadata comment with the tool version and a config hash.
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "bitrom/biroma.hpp"
#include "bitrom/config.hpp"
#include "bitrom/cost_model.hpp"
#include "bitrom/kvcache.hpp"
#include "bitrom/linear_engine.hpp"
#include "bitrom/lora.hpp"
#include "bitrom/packing.hpp"
#include "bitrom/pipeline.hpp"
#include "bitrom/quantize.hpp"
#include "bitrom/rng.hpp"
#include "bitrom/version.hpp"

namespace {

using namespace bitrom;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string metadata_line(const std::string& config_desc) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# tool=%.*s version=%.*s config_hash=%016llx",
                static_cast<int>(kToolName.size()), kToolName.data(),
                static_cast<int>(kVersion.size()), kVersion.data(),
                static_cast<unsigned long long>(fnv1a64(config_desc)));
  return buf;
}

std::string csv_document(const std::string& header,
                         const std::vector<std::string>& rows,
                         const std::string& config_desc) {
  std::ostringstream os;
  os << header << '\n';
  for (const auto& r : rows) os << r << '\n';
  os << metadata_line(config_desc) << '\n';
  return os.str();
}

std::string json_document(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  require(os.good(), "cannot open output file: " + out_path);
  os << text;
  require(os.good(), "write failed: " + out_path);
}

// Inclusive range spec: "a", "a..b" or "a..b:step".
std::vector<int> parse_range(const std::string& spec) {
  const auto bad = [&] {
    return ValidationError("bad range '" + spec + "' (expected a, a..b or a..b:s)");
  };
  int lo = 0, hi = 0, step = 1;
  const auto dots = spec.find("..");
  try {
    if (dots == std::string::npos) {
      std::size_t pos = 0;
      lo = hi = std::stoi(spec, &pos);
      if (pos != spec.size()) throw bad();
    } else {
      lo = std::stoi(spec.substr(0, dots));
      std::string rest = spec.substr(dots + 2);
      const auto colon = rest.find(':');
      if (colon != std::string::npos) {
        step = std::stoi(rest.substr(colon + 1));
        rest.erase(colon);
      }
      hi = std::stoi(rest);
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
  require(step >= 1, "range step must be >= 1");
  require(lo <= hi, "range start must not exceed end");
  std::vector<int> out;
  for (int v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

unsigned resolve_threads(unsigned flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("BITROM_SIM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::min<std::size_t>(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1))
        fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

nlohmann::json to_json(const AccessStats& s) {
  return {{"external_reads", s.external_reads},
          {"external_writes", s.external_writes},
          {"onchip_reads", s.onchip_reads},
          {"onchip_writes", s.onchip_writes},
          {"read_reduction", s.read_reduction}};
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open input file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;
    if (!rows.empty())
      require(row.size() == rows.front().size(),
              "ragged CSV matrix in " + path);
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "empty matrix in " + path);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return m;
}

// ---------------------------------------------------------------- commands

struct CommonOpts {
  std::string out;
  std::string format = "json";
};

int cmd_quantize(const std::string& in, const std::string& packed_out,
                 const std::string& encoding, const CommonOpts& common) {
  const Eigen::MatrixXd w = read_csv_matrix(in);
  const TernaryTensor t = quantize_weights_ternary(w);
  TritEncoding enc;
  if (encoding == "two_bit") {
    enc = TritEncoding::kTwoBit;
  } else if (encoding == "base243") {
    enc = TritEncoding::kBase243;
  } else {
    throw ValidationError("unknown encoding: " + encoding);
  }
  if (!packed_out.empty()) write_tensor_file(packed_out, t, enc);

  nlohmann::json j = {{"rows", t.rows()},
                      {"cols", t.cols()},
                      {"scale", t.scale},
                      {"sparsity", sparsity(t)},
                      {"encoding", encoding},
                      {"packed_bytes", packed_size(
                           static_cast<std::size_t>(t.size()), enc)},
                      {"packed_file", packed_out}};
  write_output(json_document(j), common.out);
  return 0;
}

int cmd_simulate_linear(int rows, int cols, int act_bits, int depth,
                        const std::string& policy_name, std::uint64_t seed,
                        const std::string& cost_params_path,
                        const CommonOpts& common) {
  require(rows >= 1 && cols >= 1, "simulate-linear: dims must be >= 1");
  const OverflowPolicy policy = overflow_policy_from_name(policy_name);

  Xoshiro256StarStar rng(seed);
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i)
    w.data()[i] = rng.next_symmetric();
  Eigen::VectorXd x(rows);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.next_symmetric();

  const TernaryTensor t = quantize_weights_ternary(w);
  const ActivationVector a = quantize_activations(x, act_bits);
  const ProjectionResult r = project(a, t, ArrayGeometry{}, depth, policy);
  const Eigen::VectorX<std::int64_t> ref = reference_gemm(a, t);

  nlohmann::json j = {{"rows", rows},
                      {"cols", cols},
                      {"act_bits", act_bits},
                      {"depth", depth},
                      {"policy", policy_name},
                      {"seed", seed},
                      {"weight_sparsity", sparsity(t)},
                      {"matches_reference", r.outputs == ref},
                      {"overflowed", r.overflowed},
                      {"ledger", to_json(r.ledger)}};
  if (!cost_params_path.empty()) {
    const CostParams p = load_cost_params(cost_params_path);
    j["energy"] = to_json(energy_report(r.ledger, AccessStats{}, p));
  }
  if (common.format == "csv") {
    std::ostringstream desc;
    desc << "simulate-linear rows=" << rows << " cols=" << cols
         << " act_bits=" << act_bits << " depth=" << depth
         << " policy=" << policy_name << " seed=" << seed;
    std::vector<std::string> out_rows;
    std::ostringstream row;
    row << rows << ',' << cols << ',' << act_bits << ','
        << (r.outputs == ref ? 1 : 0) << ',' << (r.overflowed ? 1 : 0) << ','
        << r.ledger.skips << ',' << r.ledger.adder_tree_passes;
    out_rows.push_back(row.str());
    write_output(
        csv_document(
            "rows,cols,act_bits,matches_reference,overflowed,skips,"
            "adder_tree_passes",
            out_rows, desc.str()),
        common.out);
  } else {
    write_output(json_document(j), common.out);
  }
  return 0;
}

int cmd_kv_sweep(const std::string& n_spec, const std::string& k_spec, int p,
                 unsigned threads, const CommonOpts& common) {
  const std::vector<int> n_values = parse_range(n_spec);
  const std::vector<int> k_values = parse_range(k_spec);

  // cells are independent; one worker per sequence length, rows reassembled
  // in (n, k) order afterwards
  std::vector<std::vector<CurveRow>> per_n(n_values.size());
  parallel_for(n_values.size(), resolve_threads(threads), [&](std::size_t i) {
    per_n[i] = reduction_curve({n_values[i]}, k_values, p);
  });
  std::vector<CurveRow> rows;
  for (const auto& part : per_n) rows.insert(rows.end(), part.begin(), part.end());

  std::ostringstream desc;
  desc << "kv-sweep n=" << n_spec << " k=" << k_spec << " p=" << p;

  if (common.format == "csv") {
    std::vector<std::string> out_rows;
    for (const CurveRow& r : rows) {
      std::ostringstream row;
      row << r.n << ',' << r.k << ',' << r.external_reads << ','
          << r.baseline_reads << ',' << fixed6(r.reduction);
      out_rows.push_back(row.str());
    }
    write_output(csv_document("n,k,external_reads,baseline_reads,reduction",
                              out_rows, desc.str()),
                 common.out);
  } else {
    auto arr = nlohmann::json::array();
    for (const CurveRow& r : rows)
      arr.push_back({{"n", r.n},
                     {"k", r.k},
                     {"external_reads", r.external_reads},
                     {"baseline_reads", r.baseline_reads},
                     {"reduction", r.reduction}});
    write_output(json_document({{"prompt_len", p}, {"rows", arr}}),
                 common.out);
  }
  return 0;
}

int cmd_area_estimate(const std::string& model_name, std::int64_t params,
                      double bits_per_param, const std::string& node_spec,
                      double ref_density, double periphery, double calibration,
                      const CommonOpts& common) {
  std::string label = model_name;
  if (!model_name.empty()) {
    params = model_preset(model_name).param_count;
  } else {
    require(params > 0, "area-estimate: give --model or --params");
    label = "custom";
  }

  const std::vector<int> nodes = parse_range(node_spec);
  std::ostringstream desc;
  desc << "area-estimate model=" << label << " params=" << params
       << " bits_per_param=" << bits_per_param << " node=" << node_spec
       << " ref_density=" << ref_density << " periphery=" << periphery
       << " calibration=" << calibration;

  std::vector<std::string> rows;
  auto arr = nlohmann::json::array();
  for (const int node : nodes) {
    AreaModel m;
    m.node_nm = node;
    m.ref_bit_density = ref_density;
    m.periphery_fraction = periphery;
    m.calibration = calibration;
    const double area = estimate_area_mm2(params, bits_per_param, m);
    std::ostringstream row;
    row << label << ',' << node << ',' << fixed6(area);
    rows.push_back(row.str());
    arr.push_back({{"model", label}, {"node_nm", node}, {"area_mm2", area}});
  }
  if (common.format == "csv") {
    write_output(csv_document("model,node_nm,area_mm2", rows, desc.str()),
                 common.out);
  } else {
    write_output(json_document(arr), common.out);
  }
  return 0;
}

AdapterPlacement parse_placement(const std::string& spec) {
  AdapterPlacement place;
  std::string token;
  std::istringstream is(spec);
  while (std::getline(is, token, ','))
    if (!token.empty()) place.insert(projection_from_name(token));
  require(!place.empty(), "empty adapter placement");
  return place;
}

int cmd_lora_overhead(const std::string& model_name,
                      const std::string& model_config_path,
                      const std::string& place_spec, int rank,
                      const CommonOpts& common) {
  const ModelConfig m = model_config_path.empty()
                            ? model_preset(model_name)
                            : load_model_config(model_config_path);
  const AdapterPlacement place = parse_placement(place_spec);
  const double pfrac = param_fraction(place, rank, m);
  const OpFractionReport ops = op_fraction(place, rank, m);

  std::ostringstream desc;
  desc << "lora-overhead model=" << m.name << " place=" << place_spec
       << " rank=" << rank;

  if (common.format == "csv") {
    std::vector<std::string> rows;
    for (const auto& [proj, frac] : ops.per_projection) {
      const ProjDims d = projection_dims(m, proj);
      std::ostringstream row;
      row << m.name << ',' << projection_name(proj) << ',' << d.d_in << ','
          << d.d_out << ',' << fixed6(frac);
      rows.push_back(row.str());
    }
    {
      std::ostringstream row;
      row << m.name << ",param_fraction_pct,,," << fixed6(pfrac);
      rows.push_back(row.str());
      std::ostringstream row2;
      row2 << m.name << ",op_fraction_mac_weighted_pct,,,"
           << fixed6(ops.aggregate_mac_weighted);
      rows.push_back(row2.str());
      std::ostringstream row3;
      row3 << m.name << ",op_fraction_unweighted_pct,,,"
           << fixed6(ops.aggregate_unweighted);
      rows.push_back(row3.str());
    }
    write_output(
        csv_document("model,projection,d_in,d_out,value_pct", rows, desc.str()),
        common.out);
  } else {
    nlohmann::json per;
    for (const auto& [proj, frac] : ops.per_projection)
      per[projection_name(proj)] = frac;
    nlohmann::json j = {{"model", m.name},
                        {"rank", rank},
                        {"param_fraction_pct", pfrac},
                        {"op_fraction_pct", per},
                        {"op_fraction_mac_weighted_pct",
                         ops.aggregate_mac_weighted},
                        {"op_fraction_unweighted_pct",
                         ops.aggregate_unweighted}};
    write_output(json_document(j), common.out);
  }
  return 0;
}

int cmd_pipeline_sim(int layers, int partitions, int batches, int steps,
                     const CommonOpts& common) {
  const PartitionPlan plan = build_partition_plan(layers, partitions);
  const PipelineSchedule sched = simulate_pipeline(plan, batches, steps);

  std::ostringstream desc;
  desc << "pipeline-sim layers=" << layers << " partitions=" << partitions
       << " batches=" << batches << " steps=" << steps;

  if (common.format == "csv") {
    std::ostringstream row;
    row << layers << ',' << partitions << ',' << batches << ',' << steps << ','
        << fixed6(sched.utilization);
    write_output(csv_document("layers,partitions,batches,steps,utilization",
                              {row.str()}, desc.str()),
                 common.out);
  } else {
    nlohmann::json j = {{"layers", layers},
                        {"partitions", partitions},
                        {"layers_per_partition", plan.layers_per_partition},
                        {"batches", batches},
                        {"steps", steps},
                        {"utilization", sched.utilization}};
    write_output(json_document(j), common.out);
  }
  return 0;
}

int cmd_decode_demo(const std::string& config_path,
                    const std::string& trace_path,
                    const std::string& cost_params_path,
                    const CommonOpts& common) {
  const ScenarioConfig cfg = load_scenario(config_path);
  const ToyModel model = ToyModel::build(cfg);
  const RunReport report = run_sequence(model);

  if (!trace_path.empty()) {
    std::ofstream os(trace_path, std::ios::binary);
    require(os.good(), "cannot open trace file: " + trace_path);
    trace_to_jsonl(report.trace, os);
  }

  nlohmann::json violations = nlohmann::json::array();
  for (const int v : report.refresh.violations) violations.push_back(v);
  nlohmann::json j = {{"model", cfg.model.name},
                      {"seq_len", cfg.seq_len},
                      {"prompt_len", cfg.prompt_len},
                      {"onchip_tokens", cfg.onchip_tokens},
                      {"seed", cfg.seed},
                      {"tokens", report.tokens},
                      {"stats", to_json(report.stats)},
                      {"ledger", to_json(report.ledger)},
                      {"utilization", report.utilization},
                      {"refresh",
                       {{"valid", report.refresh.valid},
                        {"violations", violations}}}};
  if (!cost_params_path.empty()) {
    const CostParams p = load_cost_params(cost_params_path);
    j["energy"] = to_json(energy_report(report.ledger, report.stats, p));
  }
  write_output(json_document(j), common.out);
  return 0;
}

int cmd_overflow_survey(int depth, int act_bits, double nonzero_prob,
                        std::uint64_t trials, std::uint64_t seed,
                        const CommonOpts& common) {
  const OverflowSurvey s =
      overflow_survey(depth, act_bits, nonzero_prob, trials, seed);
  std::ostringstream desc;
  desc << "overflow-survey depth=" << depth << " act_bits=" << act_bits
       << " nonzero_prob=" << nonzero_prob << " trials=" << trials
       << " seed=" << seed;
  if (common.format == "csv") {
    std::ostringstream row;
    row << depth << ',' << act_bits << ',' << fixed6(nonzero_prob) << ','
        << trials << ',' << s.overflows << ',' << fixed6(s.rate);
    write_output(
        csv_document("depth,act_bits,nonzero_prob,trials,overflows,rate",
                     {row.str()}, desc.str()),
        common.out);
  } else {
    nlohmann::json j = {{"depth", depth},
                        {"act_bits", act_bits},
                        {"nonzero_prob", nonzero_prob},
                        {"trials", trials},
                        {"overflows", s.overflows},
                        {"rate", s.rate},
                        {"seed", seed}};
    write_output(json_document(j), common.out);
  }
  return 0;
}

void print_error_json(const char* kind, const std::string& message) {
  nlohmann::json j = {{"error", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BitROM functional and event-level performance simulator"};
  app.require_subcommand(1);

  CommonOpts common;
  app.add_option("--out", common.out, "Output file path ('-' for stdout)")
      ->capture_default_str();
  app.add_option("--format", common.format, "Report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  // quantize
  auto* q = app.add_subcommand("quantize",
                               "Ternarize a real matrix and pack the trits");
  std::string q_in, q_packed, q_encoding = "two_bit";
  q->add_option("--in", q_in, "CSV matrix of weights")->required();
  q->add_option("--packed-out", q_packed, "Packed tensor file to write");
  q->add_option("--encoding", q_encoding, "two_bit or base243")
      ->check(CLI::IsMember({"two_bit", "base243"}));

  // simulate-linear
  auto* sl = app.add_subcommand(
      "simulate-linear", "Drive a random layer through the mapped datapath");
  int sl_rows = 64, sl_cols = 32, sl_bits = 4, sl_depth = 16;
  std::string sl_policy = "saturate", sl_cost;
  std::uint64_t sl_seed = 0;
  sl->add_option("--rows", sl_rows, "Input channels")->capture_default_str();
  sl->add_option("--cols", sl_cols, "Output channels")->capture_default_str();
  sl->add_option("--act-bits", sl_bits, "Activation width (4 or 8)")
      ->check(CLI::IsMember({4, 8}))
      ->capture_default_str();
  sl->add_option("--depth", sl_depth, "Local accumulation depth")
      ->capture_default_str();
  sl->add_option("--policy", sl_policy, "saturate or wrap")
      ->check(CLI::IsMember({"saturate", "wrap"}))
      ->capture_default_str();
  sl->add_option("--seed", sl_seed, "PRNG seed")->capture_default_str();
  sl->add_option("--cost-params", sl_cost, "Cost parameter config file");

  // kv-sweep
  auto* kv = app.add_subcommand(
      "kv-sweep", "External-DRAM read reduction over an (n, k) grid");
  std::string kv_n = "32..256:32", kv_k = "4..64:4";
  int kv_p = 1;
  unsigned kv_threads = 0;
  kv->add_option("--n", kv_n, "Sequence lengths (a, a..b or a..b:s)")
      ->capture_default_str();
  kv->add_option("--k", kv_k, "On-die early-token counts")
      ->capture_default_str();
  kv->add_option("--p", kv_p, "Prompt length ( 1 = pure-decode convention)")
      ->capture_default_str();
  kv->add_option("--threads", kv_threads,
                 "Worker pool size (0 = BITROM_SIM_THREADS or all cores)")
      ->capture_default_str();

  // area-estimate
  auto* area = app.add_subcommand("area-estimate",
                                  "Silicon area from bit density scaling");
  std::string area_model, area_node = "65";
  std::int64_t area_params = 0;
  double area_bpp = kBitsPerTrit, area_density = 4.967e6,
         area_periphery = 0.048, area_cal = 1.0;
  area->add_option("--model", area_model, "Model preset name");
  area->add_option("--params", area_params, "Parameter count");
  area->add_option("--bits-per-param", area_bpp, "Storage bits per parameter")
      ->capture_default_str();
  area->add_option("--node", area_node, "Fabrication node(s) in nm")
      ->capture_default_str();
  area->add_option("--ref-density", area_density,
                   "Reference bits/mm^2 at 65 nm")
      ->capture_default_str();
  area->add_option("--periphery", area_periphery, "Periphery area fraction")
      ->capture_default_str();
  area->add_option("--calibration", area_cal, "Calibration factor")
      ->capture_default_str();

  // lora-overhead
  auto* lo = app.add_subcommand("lora-overhead",
                                "Adapter parameter and operation fractions");
  std::string lo_model = "falcon3-7b", lo_config, lo_place = "V,O,D";
  int lo_rank = 16;
  lo->add_option("--model", lo_model, "Model preset name")
      ->capture_default_str();
  lo->add_option("--model-config", lo_config, "Model config file");
  lo->add_option("--place", lo_place,
                 "Projections, e.g. V,O,D or Value,Output,Down")
      ->capture_default_str();
  lo->add_option("--rank", lo_rank, "LoRA rank")->capture_default_str();

  // pipeline-sim
  auto* ps = app.add_subcommand("pipeline-sim",
                                "Partition pipeline fill/drain utilization");
  int ps_layers = 18, ps_partitions = 6, ps_batches = 6, ps_steps = 64;
  ps->add_option("--layers", ps_layers, "Transformer layers")
      ->capture_default_str();
  ps->add_option("--partitions", ps_partitions, "Macro partitions")
      ->capture_default_str();
  ps->add_option("--batches", ps_batches, "Concurrent batches")
      ->capture_default_str();
  ps->add_option("--steps", ps_steps, "Steps to simulate")
      ->capture_default_str();

  // decode-demo
  auto* dd = app.add_subcommand("decode-demo",
                                "Toy-scale end-to-end decode with accounting");
  std::string dd_config, dd_trace, dd_cost;
  dd->add_option("--config", dd_config, "Scenario config file")->required();
  dd->add_option("--trace", dd_trace, "Write the KV access trace (JSONL)");
  dd->add_option("--cost-params", dd_cost, "Cost parameter config file");

  // overflow-survey
  auto* ov = app.add_subcommand(
      "overflow-survey", "Monte-Carlo accumulator overflow rate");
  int ov_depth = 16, ov_bits = 4;
  double ov_prob = 0.5;
  std::uint64_t ov_trials = 100000, ov_seed = 0;
  ov->add_option("--depth", ov_depth, "Channel length per pass")
      ->capture_default_str();
  ov->add_option("--act-bits", ov_bits, "Activation width (4 or 8)")
      ->check(CLI::IsMember({4, 8}))
      ->capture_default_str();
  ov->add_option("--nonzero-prob", ov_prob, "P(weight != 0)")
      ->capture_default_str();
  ov->add_option("--trials", ov_trials, "Monte-Carlo trials")
      ->capture_default_str();
  ov->add_option("--seed", ov_seed, "PRNG seed")->capture_default_str();

  // let --out/--format appear after the subcommand name
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (q->parsed()) return cmd_quantize(q_in, q_packed, q_encoding, common);
    if (sl->parsed())
      return cmd_simulate_linear(sl_rows, sl_cols, sl_bits, sl_depth,
                                 sl_policy, sl_seed, sl_cost, common);
    if (kv->parsed())
      return cmd_kv_sweep(kv_n, kv_k, kv_p, kv_threads, common);
    if (area->parsed())
      return cmd_area_estimate(area_model, area_params, area_bpp, area_node,
                               area_density, area_periphery, area_cal, common);
    if (lo->parsed())
      return cmd_lora_overhead(lo_model, lo_config, lo_place, lo_rank, common);
    if (ps->parsed())
      return cmd_pipeline_sim(ps_layers, ps_partitions, ps_batches, ps_steps,
                              common);
    if (dd->parsed()) return cmd_decode_demo(dd_config, dd_trace, dd_cost, common);
    if (ov->parsed())
      return cmd_overflow_survey(ov_depth, ov_bits, ov_prob, ov_trials,
                                 ov_seed, common);
    print_error_json("usage", "no command selected");
    return 2;
  } catch (const ValidationError& e) {
    print_error_json("validation", e.what());
    return 3;
  } catch (const CorruptionError& e) {
    print_error_json("corruption", e.what());
    return 3;
  } catch (const InternalError& e) {
    print_error_json("internal", e.what());
    return 4;
  } catch (const std::exception& e) {
    print_error_json("internal", e.what());
    return 4;
  }
}
