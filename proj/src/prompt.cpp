#include "oncoprompt/prompt.hpp"

#include <algorithm>
#include <json.hpp>

#include "oncoprompt/error.hpp"
#include "oncoprompt/text.hpp"

namespace oncoprompt {

SerializationOrder::SerializationOrder()
    : fields_(kAllFeatures.begin(), kAllFeatures.end()) {}

SerializationOrder::SerializationOrder(std::vector<Feature> order)
    : fields_(std::move(order)) {
  if (fields_.empty() || fields_.front() != Feature::kDrug) {
    throw ValidationError("serialization order must start with 'drug'");
  }
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    for (std::size_t j = i + 1; j < fields_.size(); ++j) {
      if (fields_[i] == fields_[j]) {
        throw ValidationError("serialization order repeats '" +
                              std::string(feature_token(fields_[i])) + "'");
      }
    }
  }
}

SerializationOrder SerializationOrder::parse(std::string_view csv) {
  std::vector<Feature> fields;
  for (const auto& token : text::split(csv, ',')) {
    if (text::trim(token).empty()) continue;
    auto f = parse_feature(token);
    if (!f) throw ValidationError("unknown feature '" + token + "' in serialization order");
    fields.push_back(*f);
  }
  return SerializationOrder(std::move(fields));
}

std::string SerializationOrder::csv() const {
  std::vector<std::string> tokens;
  for (Feature f : fields_) tokens.emplace_back(feature_token(f));
  return text::join(tokens, ",");
}

namespace {

std::string_view sentence_phrase(Feature f) {
  switch (f) {
    case Feature::kDrug:
      return "drug name";
    case Feature::kTarget:
      return "drug target";
    case Feature::kCellLine:
      return "cell line";
    case Feature::kSmiles:
      return "drug smile";
    case Feature::kMutation:
      return "gene mutation";
  }
  return "";
}

// Fine-tune column keys. The drug key is the short "drug".
std::string_view column_key(Feature f) {
  return f == Feature::kDrug ? "drug" : sentence_phrase(f);
}

std::string field_value(const PairRecord& rec, Feature f) {
  switch (f) {
    case Feature::kDrug:
      return rec.drug_name;
    case Feature::kTarget:
      return rec.drug_target.value_or("");
    case Feature::kCellLine:
      return rec.cell_line;
    case Feature::kSmiles:
      return rec.smiles.value_or("");
    case Feature::kMutation:
      return rec.mutations ? text::join(*rec.mutations, ", ") : "";
  }
  return "";
}

// Emits (feature, value) for every flagged field in serialization order.
// Flagged features missing from the order are appended in canonical order.
template <typename Fn>
void for_each_field(const PairRecord& rec, const FeatureSet& fs,
                    const SerializationOrder& order, Fn&& fn) {
  std::vector<Feature> sequence;
  for (Feature f : order.fields()) {
    if (fs.contains(f)) sequence.push_back(f);
  }
  for (Feature f : fs.features()) {
    if (std::find(sequence.begin(), sequence.end(), f) == sequence.end()) {
      sequence.push_back(f);
    }
  }
  for (Feature f : sequence) {
    if (!rec.has(f)) {
      const std::string name(feature_token(f));
      throw SerializationError(name, "record lacks flagged field '" + name + "'");
    }
    fn(f, field_value(rec, f));
  }
}

}  // namespace

ZeroShotPrompt serialize_zero_shot(const PairRecord& record, const FeatureSet& fs,
                                   const SerializationOrder& order) {
  std::string body;
  for_each_field(record, fs, order, [&](Feature f, const std::string& value) {
    body += "The ";
    body += sentence_phrase(f);
    body += " is ";
    body += value;
    body += ". ";
  });
  body += kResponseCue;

  ZeroShotPrompt prompt;
  prompt.instruction = std::string(kZeroShotInstruction);
  prompt.body = std::move(body);
  prompt.full_text = prompt.instruction + "\n" + prompt.body;
  return prompt;
}

std::string serialize_finetune_prompt(const PairRecord& record, const FeatureSet& fs,
                                      const SerializationOrder& order) {
  std::string out;
  for_each_field(record, fs, order, [&](Feature f, const std::string& value) {
    if (value.find_first_of("\r\n") != std::string::npos) {
      const std::string name(feature_token(f));
      throw SerializationError(name, "field '" + name + "' contains a line break");
    }
    if (!out.empty()) out += '\n';
    out += column_key(f);
    out += ": ";
    out += value;
  });
  return out;
}

std::string make_completion(Label label) { return " " + std::string(to_string(label)); }

Label parse_completion(std::string_view completion, std::size_t line) {
  if (completion == " sensitive") return Label::kSensitive;
  if (completion == " resistant") return Label::kResistant;
  throw VocabularyError(line, "completion '" + std::string(completion) +
                                  "' is not one of \" sensitive\", \" resistant\"");
}

std::size_t emit_finetune_jsonl(const std::vector<FinetunePromptPair>& pairs,
                                std::ostream& sink) {
  std::size_t written = 0;
  for (const auto& pair : pairs) {
    nlohmann::ordered_json obj;
    obj["prompt"] = pair.prompt;
    obj["completion"] = pair.completion;
    std::string line;
    try {
      line = obj.dump();
    } catch (const nlohmann::json::exception& e) {
      throw SerializationError("prompt", std::string("pair is not valid UTF-8: ") + e.what());
    }
    line += '\n';
    if (!sink.write(line.data(), static_cast<std::streamsize>(line.size()))) {
      throw IoError("write failed after " + std::to_string(written) + " lines");
    }
    ++written;
  }
  if (!sink.flush()) throw IoError("flush failed after " + std::to_string(written) + " lines");
  return written;
}

std::vector<FinetunePromptPair> read_finetune_jsonl(std::istream& source) {
  std::vector<FinetunePromptPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    for (const char* key : {"prompt", "completion"}) {
      if (!obj.contains(key)) {
        throw ParseError(line_no, std::string("missing key \"") + key + "\"");
      }
      if (!obj[key].is_string()) {
        throw ParseError(line_no, std::string("key \"") + key + "\" must be a string");
      }
    }
    if (obj.size() != 2) throw ParseError(line_no, "unexpected extra keys");
    FinetunePromptPair pair;
    pair.prompt = obj["prompt"].get<std::string>();
    pair.completion = obj["completion"].get<std::string>();
    parse_completion(pair.completion, line_no);
    out.push_back(std::move(pair));
  }
  return out;
}

void write_prompt_csv(const std::vector<PromptRow>& rows, std::ostream& sink) {
  sink << "id,prompt\n";
  for (const auto& row : rows) {
    sink << text::csv_escape(row.id) << ',' << text::csv_escape(row.prompt) << '\n';
  }
  if (!sink) throw IoError("failed to write prompt csv");
}

std::vector<PromptRow> read_prompt_csv(std::istream& source) {
  std::vector<PromptRow> out;
  std::vector<std::string> row;
  std::size_t line = 0;
  while (text::read_csv_row(source, row)) {
    if (++line == 1) continue;
    if (row.size() != 2) throw ParseError(line, "expected columns id,prompt");
    out.push_back({row[0], row[1]});
  }
  return out;
}

}  // namespace oncoprompt
