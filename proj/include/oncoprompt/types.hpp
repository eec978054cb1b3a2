#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oncoprompt {

enum class Label { kSensitive, kResistant };

/// "sensitive" / "resistant".
std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);

/// What a model said about a pair. Unparseable means neither class word
/// appeared in the completion.
enum class Outcome { kSensitive, kResistant, kUnparseable };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);
Outcome to_outcome(Label label);

/// Tissue code, stored uppercase. The five named cohorts keep a fixed
/// listing order; anything else sorts after them alphabetically.
class Tissue {
 public:
  Tissue() = default;
  explicit Tissue(std::string_view code);

  const std::string& code() const noexcept { return code_; }
  bool is_known() const noexcept { return rank() < kKnown.size(); }
  std::size_t rank() const noexcept;

  static constexpr std::array<std::string_view, 5> kKnown = {
      "LUAD", "BRCA", "COREAD", "THCA", "LGG"};

  friend bool operator==(const Tissue&, const Tissue&) = default;
  friend bool operator<(const Tissue& a, const Tissue& b) {
    if (a.rank() != b.rank()) return a.rank() < b.rank();
    return a.code_ < b.code_;
  }

 private:
  std::string code_;
};

enum class Feature : std::uint8_t {
  kDrug = 0,
  kTarget = 1,
  kCellLine = 2,
  kSmiles = 3,
  kMutation = 4,
};

inline constexpr std::array<Feature, 5> kAllFeatures = {
    Feature::kDrug, Feature::kTarget, Feature::kCellLine, Feature::kSmiles,
    Feature::kMutation};

/// Config/CLI token: drug, target, cell_line, smiles, mutation.
std::string_view feature_token(Feature f);
std::optional<Feature> parse_feature(std::string_view token);
/// Human phrase used in ablation listings ("cell line", "smile", ...).
std::string_view feature_phrase(Feature f);

/// Set of included input columns. The drug is always included.
class FeatureSet {
 public:
  /// {drug, cell_line}.
  FeatureSet();
  /// Throws ValidationError if `drug` is missing.
  FeatureSet(std::initializer_list<Feature> features);
  static FeatureSet from_features(const std::vector<Feature>& features);
  /// Parses "drug,cell_line,smiles" (also accepts '+' separators).
  static FeatureSet parse(std::string_view text);

  bool contains(Feature f) const noexcept {
    return (bits_ >> static_cast<unsigned>(f)) & 1U;
  }
  /// Members in canonical order.
  std::vector<Feature> features() const;
  /// "drug+cell_line+smiles": used for artifact directories.
  std::string key() const;
  /// "drug,cell_line,smiles".
  std::string csv() const;
  /// "drug + cell line + smile".
  std::string phrase() const;

  /// The four input combinations of the LUAD ablation.
  static std::vector<FeatureSet> ablation_sets();

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  struct Bits {};
  FeatureSet(Bits, std::uint8_t bits) : bits_(bits) {}

  std::uint8_t bits_ = 0;
};

}  // namespace oncoprompt
