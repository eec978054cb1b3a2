#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oncoprompt/cohort.hpp"
#include "oncoprompt/evaluator.hpp"
#include "oncoprompt/gateway.hpp"
#include "oncoprompt/prompt.hpp"

namespace oncoprompt {

// Minimal TOML-style file: [section] headers, `key = value` lines, # comments.
// Values are "strings", numbers, true/false or ["string", "arrays"].
class KeyValueFile {
 public:
  using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

  static KeyValueFile parse(std::istream& in);
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  /// Keys are "section.name".
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_number(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_list(const std::string& key) const;

  const std::map<std::string, Value>& values() const noexcept { return values_; }

 private:
  std::map<std::string, Value> values_;
};

struct ServiceConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  FeatureSet features = FeatureSet{Feature::kDrug, Feature::kTarget, Feature::kCellLine,
                                   Feature::kSmiles, Feature::kMutation};
  std::string cors_origin = "*";
};

struct RunConfig {
  std::filesystem::path pairs_path;
  std::filesystem::path smiles_path;
  std::filesystem::path mutations_path;
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> cache_dir;
  SchemaMap schema;
  LabelPolicy policy;
  SplitSpec split{0.8, 42};
  std::vector<FeatureSet> feature_sets = FeatureSet::ablation_sets();
  std::vector<Tissue> tissues;  // empty: every tissue present in the table
  Setting setting = Setting::kZeroShot;
  SerializationOrder order;
  std::size_t parallelism = 4;
  BackendConfig backend;
  FinetuneSpec finetune;
  ServiceConfig service;

  /// Throws ConfigError on invariant violations.
  void validate() const;
};

/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
RunConfig run_config_from(const KeyValueFile& file, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// "crebbp=sensitive" style marker list.
MockRule parse_mock_rule(const std::vector<std::string>& markers, std::string_view fallback);

}  // namespace oncoprompt
