#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oncoprompt/types.hpp"

namespace oncoprompt {

/// One drug / cell-line observation with its annotations and ln(IC50).
struct PairRecord {
  std::string drug_name;
  std::optional<std::string> drug_target;
  std::string cell_line;
  Tissue tissue;
  std::optional<std::string> smiles;
  std::optional<std::vector<std::string>> mutations;  // sorted, unique
  double ln_ic50 = 0.0;

  bool has(Feature f) const;

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

/// Sensitive iff ln(IC50) < theta.
struct LabelPolicy {
  double theta = -2.0;
};

struct LabeledRecord {
  PairRecord record;
  Label label;

  friend bool operator==(const LabeledRecord&, const LabeledRecord&) = default;
};

struct Cohort {
  Tissue tissue;
  std::vector<LabeledRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  std::vector<Label> labels() const;

  friend bool operator==(const Cohort&, const Cohort&) = default;
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct SplitResult {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;

  friend bool operator==(const SplitResult&, const SplitResult&) = default;
};

/// Fine-tune job metadata exported next to the JSONL files. Running the job
/// is left to the provider.
struct FinetuneSpec {
  std::string model_id = "ada";
  int epochs = 4;
  std::string provider = "openai";

  /// Throws ValidationError when epochs < 1 or model_id is empty.
  void validate() const;
};

/// Maps record fields onto table column names. Required: drug_name,
/// cell_line, tissue, ln_ic50. drug_target is optional.
struct SchemaMap {
  std::string drug_name = "DRUG_NAME";
  std::optional<std::string> drug_target = "PUTATIVE_TARGET";
  std::string cell_line = "CELL_LINE_NAME";
  std::string tissue = "TCGA_DESC";
  std::string ln_ic50 = "LN_IC50";
};

struct RowDiagnostic {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string message;
};

struct IngestResult {
  std::vector<PairRecord> records;
  std::vector<RowDiagnostic> rejected;
};

/// Reads a comma-separated table with a header row. Rows whose ln_ic50 does
/// not parse (or whose required text fields are empty) land in `rejected`.
/// Throws SchemaError for a mapped column absent from the header and
/// EmptyInputError when the stream holds no header at all.
IngestResult ingest_pairs(std::istream& source, const SchemaMap& schema);

using SmilesMap = std::map<std::string, std::string, std::less<>>;
using MutationMap = std::map<std::string, std::vector<std::string>, std::less<>>;

/// Two-column key,value file. Keys are lowercased; a header row whose first
/// cell is a non-data label may be skipped via `has_header`.
SmilesMap read_smiles_map(std::istream& source, bool has_header = true);
/// Same layout; repeated keys accumulate (one gene per row).
MutationMap read_mutation_map(std::istream& source, bool has_header = true);

std::vector<PairRecord> attach_annotations(std::vector<PairRecord> records,
                                           const SmilesMap& smiles,
                                           const MutationMap& mutations);

/// Throws DomainError on NaN or infinity.
Label binarize_response(double ln_ic50, const LabelPolicy& policy);

Cohort build_cohort(const std::vector<PairRecord>& records,
                    const Tissue& tissue, const LabelPolicy& policy);

Cohort filter_by_features(const Cohort& cohort, const FeatureSet& fs);

/// Per class, train receives floor(n_c * f); the slots left to reach
/// round(N * f) go one per class by descending fractional remainder (ties
/// by class name). Members are picked by a seeded Fisher-Yates shuffle.
SplitResult stratified_split(const Cohort& cohort, const SplitSpec& spec);

/// Normalizes a gene list: lowercase, trimmed, empty entries dropped,
/// sorted and deduplicated.
std::vector<std::string> normalize_genes(std::vector<std::string> genes);

}  // namespace oncoprompt
