#include "oncoprompt/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "oncoprompt/error.hpp"

namespace oncoprompt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json optional_json(const std::optional<std::string>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

template <typename Fn>
auto schema_guard(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

ordered_json cohort_to_json(const Cohort& cohort) {
  ordered_json doc;
  doc["tissue"] = cohort.tissue.code();
  doc["size"] = cohort.size();
  doc["records"] = ordered_json::array();
  for (const auto& [rec, label] : cohort.records) {
    ordered_json r;
    r["drug_name"] = rec.drug_name;
    r["drug_target"] = optional_json(rec.drug_target);
    r["cell_line"] = rec.cell_line;
    r["tissue"] = rec.tissue.code();
    r["smiles"] = optional_json(rec.smiles);
    r["mutations"] = rec.mutations ? ordered_json(*rec.mutations) : ordered_json(nullptr);
    r["ln_ic50"] = rec.ln_ic50;
    r["label"] = to_string(label);
    doc["records"].push_back(std::move(r));
  }
  return doc;
}

Cohort cohort_from_json(const json& doc) {
  return schema_guard("cohort", [&] {
    Cohort cohort;
    cohort.tissue = Tissue(doc.at("tissue").get<std::string>());
    for (const auto& r : doc.at("records")) {
      PairRecord rec;
      rec.drug_name = r.at("drug_name").get<std::string>();
      rec.drug_target = optional_string(r, "drug_target");
      rec.cell_line = r.at("cell_line").get<std::string>();
      rec.tissue = Tissue(r.at("tissue").get<std::string>());
      rec.smiles = optional_string(r, "smiles");
      if (r.contains("mutations") && !r["mutations"].is_null()) {
        rec.mutations = r["mutations"].get<std::vector<std::string>>();
      }
      rec.ln_ic50 = r.at("ln_ic50").get<double>();
      auto label = parse_label(r.at("label").get<std::string>());
      if (!label) throw ParseError(1, "cohort record has an unknown label");
      if (rec.tissue != cohort.tissue) throw ParseError(1, "cohort record from another tissue");
      cohort.records.push_back({std::move(rec), *label});
    }
    return cohort;
  });
}

ordered_json split_to_json(const SplitResult& split, const SplitSpec& spec, const Cohort& cohort) {
  auto count = [&](const std::vector<std::size_t>& idx, Label l) {
    std::size_t n = 0;
    for (auto i : idx) n += cohort.records[i].label == l;
    return n;
  };
  ordered_json doc;
  doc["train_fraction"] = spec.train_fraction;
  doc["seed"] = spec.seed;
  doc["train_size"] = split.train_indices.size();
  doc["test_size"] = split.test_indices.size();
  for (Label l : {Label::kSensitive, Label::kResistant}) {
    doc["class_counts"][std::string(to_string(l))] = {
        {"train", count(split.train_indices, l)}, {"test", count(split.test_indices, l)}};
  }
  doc["train_indices"] = split.train_indices;
  doc["test_indices"] = split.test_indices;
  return doc;
}

SplitResult split_from_json(const json& doc) {
  return schema_guard("split", [&] {
    SplitResult s;
    s.train_indices = doc.at("train_indices").get<std::vector<std::size_t>>();
    s.test_indices = doc.at("test_indices").get<std::vector<std::size_t>>();
    return s;
  });
}

ordered_json prediction_to_json(std::size_t index, const Prediction& p) {
  ordered_json j;
  j["index"] = index;
  j["outcome"] = p.error ? ordered_json(nullptr) : ordered_json(to_string(p.outcome));
  j["raw"] = p.raw;
  j["prompt_sha256"] = p.prompt_digest;
  if (p.error) j["error"] = *p.error;
  return j;
}

Prediction prediction_from_json(const json& item) {
  return schema_guard("prediction", [&] {
    Prediction p;
    p.raw = item.at("raw").get<std::string>();
    p.prompt_digest = item.at("prompt_sha256").get<std::string>();
    p.error = optional_string(item, "error");
    if (!p.error) {
      auto o = parse_outcome(item.at("outcome").get<std::string>());
      if (!o) throw ParseError(1, "prediction has an unknown outcome");
      p.outcome = *o;
    }
    return p;
  });
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_artifact(const std::filesystem::path& path, ordered_json doc,
                    const std::string& config_digest) {
  ordered_json out;
  out["version"] = kArtifactVersion;
  out["config_digest"] = config_digest;
  for (auto& [k, v] : doc.items()) {
    if (k != "version" && k != "config_digest") out[k] = std::move(v);
  }
  write_file_atomic(path, out.dump(2) + "\n");
}

json read_artifact(const std::filesystem::path& path, const std::string& config_digest) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(1, path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("version", 0) != kArtifactVersion) {
    throw ValidationError(path.string() + ": unsupported artifact version");
  }
  if (doc.value("config_digest", std::string{}) != config_digest) {
    throw ValidationError(path.string() +
                          " was produced under a different configuration; re-run upstream steps");
  }
  return doc;
}

}  // namespace oncoprompt
