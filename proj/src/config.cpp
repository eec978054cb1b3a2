#include "oncoprompt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "oncoprompt/error.hpp"
#include "oncoprompt/text.hpp"

namespace oncoprompt {

namespace {

// Reads a double-quoted string starting at s[pos] == '"'; advances pos past
// the closing quote.
std::string read_quoted(std::string_view s, std::size_t& pos, std::size_t line) {
  std::string out;
  ++pos;
  while (pos < s.size()) {
    const char c = s[pos++];
    if (c == '"') return out;
    if (c == '\\' && pos < s.size()) {
      const char e = s[pos++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: throw ParseError(line, std::string("unknown escape \\") + e);
      }
      continue;
    }
    out += c;
  }
  throw ParseError(line, "unterminated string");
}

std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && quoted) {
      ++i;
    } else if (s[i] == '"') {
      quoted = !quoted;
    } else if (s[i] == '#' && !quoted) {
      return s.substr(0, i);
    }
  }
  return s;
}

KeyValueFile::Value parse_value(std::string_view raw, std::size_t line) {
  const std::string_view v = text::trim(raw);
  if (v.empty()) throw ParseError(line, "missing value");
  if (v.front() == '"') {
    std::size_t pos = 0;
    std::string s = read_quoted(v, pos, line);
    if (!text::trim(v.substr(pos)).empty()) throw ParseError(line, "trailing text after string");
    return s;
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw ParseError(line, "unterminated array");
    std::vector<std::string> items;
    std::size_t pos = 1;
    const std::size_t end = v.size() - 1;
    while (true) {
      while (pos < end && (v[pos] == ' ' || v[pos] == '\t')) ++pos;
      if (pos >= end) break;
      if (v[pos] != '"') throw ParseError(line, "array items must be strings");
      items.push_back(read_quoted(v, pos, line));
      while (pos < end && (v[pos] == ' ' || v[pos] == '\t')) ++pos;
      if (pos < end) {
        if (v[pos] != ',') throw ParseError(line, "expected ',' between array items");
        ++pos;
      }
    }
    return items;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (auto d = text::parse_double(v)) return *d;
  throw ParseError(line, "cannot parse value '" + std::string(v) + "'");
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in) {
  KeyValueFile file;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = text::trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header");
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (file.values_.count(full)) throw ParseError(line_no, "duplicate key '" + full + "'");
    file.values_.emplace(full, parse_value(line.substr(eq + 1), line_no));
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse(in);
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw ConfigError("config key '" + key + "' must be a string");
}

std::optional<double> KeyValueFile::get_number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* d = std::get_if<double>(&it->second)) return *d;
  throw ConfigError("config key '" + key + "' must be a number");
}

std::optional<bool> KeyValueFile::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* b = std::get_if<bool>(&it->second)) return *b;
  throw ConfigError("config key '" + key + "' must be true or false");
}

std::optional<std::vector<std::string>> KeyValueFile::get_list(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* l = std::get_if<std::vector<std::string>>(&it->second)) return *l;
  throw ConfigError("config key '" + key + "' must be an array of strings");
}

MockRule parse_mock_rule(const std::vector<std::string>& markers, std::string_view fallback) {
  MockRule rule;
  auto label = [](std::string_view s) {
    auto l = parse_label(text::to_lower(text::trim(s)));
    if (!l) throw ConfigError("mock label must be sensitive or resistant, got '" + std::string(s) + "'");
    return *l;
  };
  for (const auto& m : markers) {
    const auto eq = m.rfind('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("mock rule '" + m + "' must look like marker=label");
    }
    rule.markers.emplace_back(m.substr(0, eq), label(m.substr(eq + 1)));
  }
  rule.fallback = label(fallback);
  return rule;
}

namespace {

std::int64_t as_integer(double d, const std::string& key) {
  if (d != static_cast<double>(static_cast<std::int64_t>(d))) {
    throw ConfigError("config key '" + key + "' must be an integer");
  }
  return static_cast<std::int64_t>(d);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "paths.pairs", "paths.smiles", "paths.mutations", "paths.output", "paths.cache",
      "schema.drug_name", "schema.drug_target", "schema.cell_line", "schema.tissue",
      "schema.ln_ic50", "policy.theta", "split.train_fraction", "split.seed",
      "experiment.tissues", "experiment.feature_sets", "experiment.setting",
      "experiment.order", "experiment.parallelism", "backend.kind", "backend.endpoint_url",
      "backend.model_id", "backend.temperature", "backend.max_tokens", "backend.timeout_ms",
      "backend.max_attempts", "backend.base_backoff_ms", "backend.api_key_env",
      "backend.mock_rules", "backend.mock_default", "service.host", "service.port",
      "service.features", "service.cors_origin", "finetune.model_id", "finetune.epochs",
      "finetune.provider"};
  return keys;
}

}  // namespace

RunConfig run_config_from(const KeyValueFile& file, const std::filesystem::path& base_dir) {
  for (const auto& [key, _] : file.values()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig cfg;
  auto path = [&](const std::string& key, std::filesystem::path& dst) {
    if (auto s = file.get_string(key)) {
      std::filesystem::path p(*s);
      dst = p.is_absolute() ? p : base_dir / p;
    }
  };
  path("paths.pairs", cfg.pairs_path);
  path("paths.smiles", cfg.smiles_path);
  path("paths.mutations", cfg.mutations_path);
  path("paths.output", cfg.output_dir);
  if (file.has("paths.cache")) {
    std::filesystem::path p;
    path("paths.cache", p);
    cfg.cache_dir = p;
  }

  if (auto s = file.get_string("schema.drug_name")) cfg.schema.drug_name = *s;
  if (auto s = file.get_string("schema.drug_target")) {
    if (s->empty()) cfg.schema.drug_target.reset();
    else cfg.schema.drug_target = *s;
  }
  if (auto s = file.get_string("schema.cell_line")) cfg.schema.cell_line = *s;
  if (auto s = file.get_string("schema.tissue")) cfg.schema.tissue = *s;
  if (auto s = file.get_string("schema.ln_ic50")) cfg.schema.ln_ic50 = *s;

  if (auto d = file.get_number("policy.theta")) cfg.policy.theta = *d;
  if (auto d = file.get_number("split.train_fraction")) cfg.split.train_fraction = *d;
  if (auto d = file.get_number("split.seed")) {
    const auto seed = as_integer(*d, "split.seed");
    if (seed < 0) throw ConfigError("split.seed must be non-negative");
    cfg.split.seed = static_cast<std::uint64_t>(seed);
  }

  if (auto l = file.get_list("experiment.tissues")) {
    for (const auto& t : *l) cfg.tissues.emplace_back(t);
  }
  if (auto l = file.get_list("experiment.feature_sets")) {
    cfg.feature_sets.clear();
    for (const auto& fs : *l) cfg.feature_sets.push_back(FeatureSet::parse(fs));
  }
  if (auto s = file.get_string("experiment.setting")) cfg.setting = parse_setting(*s);
  if (auto s = file.get_string("experiment.order")) cfg.order = SerializationOrder::parse(*s);
  if (auto d = file.get_number("experiment.parallelism")) {
    const auto p = as_integer(*d, "experiment.parallelism");
    if (p < 1) throw ConfigError("experiment.parallelism must be >= 1");
    cfg.parallelism = static_cast<std::size_t>(p);
  }

  BackendConfig& b = cfg.backend;
  if (auto s = file.get_string("backend.kind")) {
    if (*s == "mock") b.kind = BackendKind::kMock;
    else if (*s == "live") b.kind = BackendKind::kLive;
    else throw ConfigError("backend.kind must be mock or live");
  }
  if (auto s = file.get_string("backend.endpoint_url")) b.endpoint_url = *s;
  if (auto s = file.get_string("backend.model_id")) b.model_id = *s;
  if (auto d = file.get_number("backend.temperature")) b.temperature = *d;
  if (auto d = file.get_number("backend.max_tokens")) {
    b.max_tokens = static_cast<int>(as_integer(*d, "backend.max_tokens"));
  }
  if (auto d = file.get_number("backend.timeout_ms")) {
    b.timeout = std::chrono::milliseconds(as_integer(*d, "backend.timeout_ms"));
  }
  if (auto d = file.get_number("backend.max_attempts")) {
    b.retry.max_attempts = static_cast<int>(as_integer(*d, "backend.max_attempts"));
  }
  if (auto d = file.get_number("backend.base_backoff_ms")) {
    b.retry.base_backoff = std::chrono::milliseconds(as_integer(*d, "backend.base_backoff_ms"));
  }
  if (auto s = file.get_string("backend.api_key_env")) b.api_key_env = *s;
  b.mock = parse_mock_rule(file.get_list("backend.mock_rules").value_or(std::vector<std::string>{}),
                           file.get_string("backend.mock_default").value_or("resistant"));

  if (auto s = file.get_string("finetune.model_id")) cfg.finetune.model_id = *s;
  if (auto d = file.get_number("finetune.epochs")) {
    cfg.finetune.epochs = static_cast<int>(as_integer(*d, "finetune.epochs"));
  }
  if (auto s = file.get_string("finetune.provider")) cfg.finetune.provider = *s;

  if (auto s = file.get_string("service.host")) cfg.service.host = *s;
  if (auto d = file.get_number("service.port")) {
    cfg.service.port = static_cast<int>(as_integer(*d, "service.port"));
  }
  if (auto s = file.get_string("service.features")) cfg.service.features = FeatureSet::parse(*s);
  if (auto s = file.get_string("service.cors_origin")) cfg.service.cors_origin = *s;

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto file = KeyValueFile::load(path);
  return run_config_from(file, std::filesystem::absolute(path).parent_path());
}

void RunConfig::validate() const {
  if (feature_sets.empty()) throw ConfigError("experiment.feature_sets must be non-empty");
  if (!std::isfinite(policy.theta)) throw ConfigError("policy.theta must be finite");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw ConfigError("split.train_fraction must lie strictly between 0 and 1");
  }
  if (parallelism < 1) throw ConfigError("experiment.parallelism must be >= 1");
  if (service.port < 0 || service.port > 65535) throw ConfigError("service.port out of range");
  backend.validate();
  try {
    finetune.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace oncoprompt
