#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "oncoprompt/cohort.hpp"
#include "oncoprompt/types.hpp"

namespace oncoprompt {

/// Column order used when serializing a record. Drug comes first and no
/// column repeats.
class SerializationOrder {
 public:
  /// drug, target, cell_line, smiles, mutation.
  SerializationOrder();
  /// Throws ValidationError on duplicates or when drug is not first.
  explicit SerializationOrder(std::vector<Feature> order);
  static SerializationOrder parse(std::string_view csv);

  const std::vector<Feature>& fields() const noexcept { return fields_; }
  std::string csv() const;

 private:
  std::vector<Feature> fields_;
};

inline constexpr std::string_view kZeroShotInstruction =
    "Decide in a single word if the drug's response to the target is sensitive or resistant.";
inline constexpr std::string_view kResponseCue = "Drug response:";

struct ZeroShotPrompt {
  std::string instruction;
  std::string body;
  std::string full_text;  // instruction + "\n" + body
};

struct FinetunePromptPair {
  std::string prompt;
  std::string completion;

  friend bool operator==(const FinetunePromptPair&, const FinetunePromptPair&) = default;
};

/// "The drug name is pci-34051. The drug target is hdac1. ... Drug response:"
/// Only fields flagged in `fs` are emitted, in `order`. Throws
/// SerializationError naming the first flagged field the record lacks.
ZeroShotPrompt serialize_zero_shot(const PairRecord& record, const FeatureSet& fs,
                                   const SerializationOrder& order = {});

/// "drug: pci-34051\ndrug target: hdac1\ngene mutation: crebbp", no trailing
/// newline.
std::string serialize_finetune_prompt(const PairRecord& record, const FeatureSet& fs,
                                      const SerializationOrder& order = {});

/// " sensitive" / " resistant".
std::string make_completion(Label label);
/// Inverse of make_completion; throws VocabularyError(line) otherwise.
Label parse_completion(std::string_view completion, std::size_t line = 0);

/// Writes one compact JSON object per line. Each line is fully formatted
/// before it reaches the sink; on a failed write an IoError is thrown and
/// the sink holds only whole lines.
std::size_t emit_finetune_jsonl(const std::vector<FinetunePromptPair>& pairs,
                                std::ostream& sink);

/// Reads emit_finetune_jsonl output back. ParseError on malformed lines or
/// schema violations, VocabularyError on completions outside the label set.
std::vector<FinetunePromptPair> read_finetune_jsonl(std::istream& source);

struct PromptRow {
  std::string id;
  std::string prompt;
};

/// Two-column audit CSV: header "id,prompt", quoted as needed.
void write_prompt_csv(const std::vector<PromptRow>& rows, std::ostream& sink);
std::vector<PromptRow> read_prompt_csv(std::istream& source);

}  // namespace oncoprompt
