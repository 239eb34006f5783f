// SPDX-License-Identifier: Apache-2.0
#include "bitrom/config.hpp"

#include <fstream>
#include <sstream>

namespace bitrom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
  KeyValueFile kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos,
            "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), "config line " + std::to_string(lineno) +
                              ": empty key");
    kv.entries_[key] = value;
  }
  return kv;
}

KeyValueFile KeyValueFile::parse_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open config file: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_string(ss.str());
}

bool KeyValueFile::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  require(it != entries_.end(), "config: missing key '" + key + "'");
  return it->second;
}

std::string KeyValueFile::get_string_or(const std::string& key,
                                        const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::int64_t KeyValueFile::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const std::int64_t r = std::stoll(v, &pos);
    require(pos == v.size(), "config: key '" + key + "' is not an integer");
    return r;
  } catch (const std::exception&) {
    throw ValidationError("config: key '" + key + "' is not an integer");
  }
}

std::int64_t KeyValueFile::get_int_or(const std::string& key,
                                      std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double KeyValueFile::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    require(pos == v.size(), "config: key '" + key + "' is not a number");
    return r;
  } catch (const std::exception&) {
    throw ValidationError("config: key '" + key + "' is not a number");
  }
}

double KeyValueFile::get_double_or(const std::string& key,
                                   double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

ModelConfig model_config_from_keys(const KeyValueFile& kv) {
  ModelConfig m;
  m.name = kv.get_string_or("name", "unnamed");
  m.layers = kv.get_int("layers");
  m.hidden_dim = kv.get_int("hidden_dim");
  m.ffn_dim = kv.get_int("ffn_dim");
  m.heads = kv.get_int("heads");
  m.kv_heads = kv.get_int("kv_heads");
  m.head_dim = kv.get_int("head_dim");
  m.param_count = kv.get_int("param_count");
  m.validate();
  return m;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  return model_config_from_keys(KeyValueFile::parse_file(path));
}

namespace {

ModelConfig falcon(const std::string& name, std::int64_t layers,
                   std::int64_t hidden, std::int64_t ffn, std::int64_t heads,
                   std::int64_t kv_heads, std::int64_t params) {
  ModelConfig m;
  m.name = name;
  m.layers = layers;
  m.hidden_dim = hidden;
  m.ffn_dim = ffn;
  m.heads = heads;
  m.kv_heads = kv_heads;
  m.head_dim = hidden / heads;
  m.param_count = params;
  m.validate();
  return m;
}

}  // namespace

ModelConfig model_preset(const std::string& name) {
  if (name == "falcon3-1b")
    return falcon("falcon3-1b", 18, 2048, 8192, 8, 4, 1669408768LL);
  if (name == "falcon3-3b")
    return falcon("falcon3-3b", 22, 3072, 9216, 12, 4, 3227655168LL);
  if (name == "falcon3-7b")
    return falcon("falcon3-7b", 28, 3072, 23040, 12, 4, 7455550464LL);
  if (name == "falcon3-10b")
    return falcon("falcon3-10b", 40, 3072, 23040, 12, 4, 10305653760LL);
  throw ValidationError("unknown model preset: " + name);
}

std::vector<std::string> model_preset_names() {
  return {"falcon3-1b", "falcon3-3b", "falcon3-7b", "falcon3-10b"};
}

OverflowPolicy overflow_policy_from_name(const std::string& name) {
  if (name == "saturate") return OverflowPolicy::kSaturate;
  if (name == "wrap") return OverflowPolicy::kWrapAndFlag;
  throw ValidationError("unknown overflow policy: " + name +
                        " (expected saturate|wrap)");
}

void ScenarioConfig::validate() const {
  model.validate();
  require(vocab > 0, "scenario: vocab must be positive");
  require(prompt_len >= 1, "scenario: prompt_len must be >= 1");
  require(seq_len >= prompt_len, "scenario: seq_len must be >= prompt_len");
  require(onchip_tokens >= 0 && onchip_tokens <= seq_len,
          "scenario: onchip_tokens must be in [0, seq_len]");
  require(act_bits == 4 || act_bits == 8, "scenario: act_bits must be 4 or 8");
  require(depth >= 1, "scenario: depth must be >= 1");
  require(element_bits > 0, "scenario: element_bits must be positive");
  require(partitions >= 1 && batches >= 1,
          "scenario: partitions and batches must be >= 1");
  require(model.layers % partitions == 0,
          "scenario: layers must be divisible by partitions");
  require(tbt_ms > 0 && tref_ms > 0, "scenario: timings must be positive");
  require(model.heads % model.kv_heads == 0,
          "scenario: heads must be divisible by kv_heads");
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::parse_file(path);
  ScenarioConfig s;
  if (kv.has("model")) {
    s.model = model_preset(kv.get_string("model"));
  } else if (kv.has("model_config")) {
    s.model = load_model_config(kv.get_string("model_config"));
  } else {
    s.model = model_config_from_keys(kv);
  }
  s.vocab = static_cast<int>(kv.get_int_or("vocab", 32));
  s.prompt_len = static_cast<int>(kv.get_int_or("prompt_len", 1));
  s.seq_len = static_cast<int>(kv.get_int_or("seq_len", 8));
  s.onchip_tokens = static_cast<int>(kv.get_int_or("onchip_tokens", 0));
  s.act_bits = static_cast<int>(kv.get_int_or("act_bits", 8));
  s.depth = static_cast<int>(kv.get_int_or("depth", 16));
  s.element_bits = static_cast<int>(kv.get_int_or("element_bits", 16));
  s.partitions = static_cast<int>(kv.get_int_or("partitions", 1));
  s.batches = static_cast<int>(kv.get_int_or("batches", 1));
  s.tbt_ms = kv.get_double_or("tbt_ms", 10.0);
  s.tref_ms = kv.get_double_or("tref_ms", 64.0);
  s.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 0));
  s.policy = overflow_policy_from_name(kv.get_string_or("policy", "saturate"));
  if (kv.has("adapter_value")) s.adapter_value = kv.get_string("adapter_value");
  if (kv.has("adapter_output"))
    s.adapter_output = kv.get_string("adapter_output");
  if (kv.has("adapter_down")) s.adapter_down = kv.get_string("adapter_down");
  s.validate();
  return s;
}

}  // namespace bitrom
