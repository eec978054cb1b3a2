#include "oncoprompt/types.hpp"

#include <algorithm>

#include "oncoprompt/error.hpp"
#include "oncoprompt/text.hpp"

namespace oncoprompt {

std::string_view to_string(Label label) {
  return label == Label::kSensitive ? "sensitive" : "resistant";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "sensitive") return Label::kSensitive;
  if (text == "resistant") return Label::kResistant;
  return std::nullopt;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSensitive:
      return "sensitive";
    case Outcome::kResistant:
      return "resistant";
    case Outcome::kUnparseable:
      return "unparseable";
  }
  return "unparseable";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  if (text == "sensitive") return Outcome::kSensitive;
  if (text == "resistant") return Outcome::kResistant;
  if (text == "unparseable") return Outcome::kUnparseable;
  return std::nullopt;
}

Outcome to_outcome(Label label) {
  return label == Label::kSensitive ? Outcome::kSensitive : Outcome::kResistant;
}

Tissue::Tissue(std::string_view code) : code_(text::to_upper(text::trim(code))) {
  // GDSC exports the colorectal cohort as "COAD/READ".
  if (code_ == "COAD/READ" || code_ == "COAD_READ") code_ = "COREAD";
}

std::size_t Tissue::rank() const noexcept {
  auto it = std::find(kKnown.begin(), kKnown.end(), code_);
  return static_cast<std::size_t>(it - kKnown.begin());
}

std::string_view feature_token(Feature f) {
  switch (f) {
    case Feature::kDrug:
      return "drug";
    case Feature::kTarget:
      return "target";
    case Feature::kCellLine:
      return "cell_line";
    case Feature::kSmiles:
      return "smiles";
    case Feature::kMutation:
      return "mutation";
  }
  return "";
}

std::optional<Feature> parse_feature(std::string_view token) {
  const std::string t = text::to_lower(text::trim(token));
  for (Feature f : kAllFeatures) {
    if (t == feature_token(f)) return f;
  }
  if (t == "drug_name") return Feature::kDrug;
  if (t == "drug_target") return Feature::kTarget;
  if (t == "cell line" || t == "cellline") return Feature::kCellLine;
  if (t == "smile") return Feature::kSmiles;
  if (t == "mutations") return Feature::kMutation;
  return std::nullopt;
}

std::string_view feature_phrase(Feature f) {
  switch (f) {
    case Feature::kDrug:
      return "drug";
    case Feature::kTarget:
      return "drug target";
    case Feature::kCellLine:
      return "cell line";
    case Feature::kSmiles:
      return "smile";
    case Feature::kMutation:
      return "mutation";
  }
  return "";
}

FeatureSet::FeatureSet() : FeatureSet{Feature::kDrug, Feature::kCellLine} {}

FeatureSet::FeatureSet(std::initializer_list<Feature> features)
    : FeatureSet(from_features(std::vector<Feature>(features))) {}

FeatureSet FeatureSet::from_features(const std::vector<Feature>& features) {
  FeatureSet fs(Bits{}, 0);
  for (Feature f : features) fs.bits_ |= std::uint8_t(1U << static_cast<unsigned>(f));
  if (!fs.contains(Feature::kDrug)) {
    throw ValidationError("feature set must include 'drug'");
  }
  return fs;
}

FeatureSet FeatureSet::parse(std::string_view spec) {
  std::string normalized(spec);
  std::replace(normalized.begin(), normalized.end(), '+', ',');
  std::vector<Feature> features;
  for (const auto& token : text::split(normalized, ',')) {
    if (text::trim(token).empty()) continue;
    auto f = parse_feature(token);
    if (!f) throw ValidationError("unknown feature '" + token + "'");
    features.push_back(*f);
  }
  return from_features(features);
}

std::vector<Feature> FeatureSet::features() const {
  std::vector<Feature> out;
  for (Feature f : kAllFeatures) {
    if (contains(f)) out.push_back(f);
  }
  return out;
}

std::string FeatureSet::key() const {
  std::string out;
  for (Feature f : features()) {
    if (!out.empty()) out += '+';
    out += feature_token(f);
  }
  return out;
}

std::string FeatureSet::csv() const {
  std::string out;
  for (Feature f : features()) {
    if (!out.empty()) out += ',';
    out += feature_token(f);
  }
  return out;
}

std::string FeatureSet::phrase() const {
  std::string out;
  for (Feature f : features()) {
    if (!out.empty()) out += " + ";
    out += feature_phrase(f);
  }
  return out;
}

std::vector<FeatureSet> FeatureSet::ablation_sets() {
  using F = Feature;
  return {
      FeatureSet{F::kDrug, F::kCellLine},
      FeatureSet{F::kDrug, F::kCellLine, F::kSmiles},
      FeatureSet{F::kDrug, F::kCellLine, F::kMutation},
      FeatureSet{F::kDrug, F::kCellLine, F::kSmiles, F::kMutation},
  };
}

}  // namespace oncoprompt
