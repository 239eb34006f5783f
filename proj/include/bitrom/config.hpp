// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bitrom/trimla.hpp"
#include "bitrom/types.hpp"

namespace bitrom {

// Structured text config: one `key = value` per line, `#` starts a
// comment, later keys win.
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::filesystem::path& path);
  static KeyValueFile parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;

  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
};

// name = ..., layers = ..., hidden_dim = ..., ffn_dim = ..., heads = ...,
// kv_heads = ..., head_dim = ..., param_count = ...
ModelConfig load_model_config(const std::filesystem::path& path);
ModelConfig model_config_from_keys(const KeyValueFile& kv);

// Published Falcon3 dimension sets with analytic parameter totals
// (untied 131072-entry embeddings, RMSNorm weights, no biases).
ModelConfig model_preset(const std::string& name);
std::vector<std::string> model_preset_names();

OverflowPolicy overflow_policy_from_name(const std::string& name);

// Toy decode scenario. Model dimensions may come from a preset
// (model = <name>) or be given inline.
struct ScenarioConfig {
  ModelConfig model;
  int vocab = 32;
  int prompt_len = 1;
  int seq_len = 8;
  int onchip_tokens = 0;
  int act_bits = 8;
  int depth = 16;
  int element_bits = 16;
  int partitions = 1;
  int batches = 1;
  double tbt_ms = 10.0;
  double tref_ms = 64.0;
  std::uint64_t seed = 0;
  OverflowPolicy policy = OverflowPolicy::kSaturate;
  std::optional<std::string> adapter_value;
  std::optional<std::string> adapter_output;
  std::optional<std::string> adapter_down;

  void validate() const;
};

ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace bitrom
