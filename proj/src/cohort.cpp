#include "oncoprompt/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "oncoprompt/error.hpp"
#include "oncoprompt/text.hpp"

namespace oncoprompt {

bool PairRecord::has(Feature f) const {
  switch (f) {
    case Feature::kDrug:
      return !drug_name.empty();
    case Feature::kCellLine:
      return !cell_line.empty();
    case Feature::kTarget:
      return drug_target && !drug_target->empty();
    case Feature::kSmiles:
      return smiles && !smiles->empty();
    case Feature::kMutation:
      return mutations && !mutations->empty();
  }
  return false;
}

void FinetuneSpec::validate() const {
  if (epochs < 1) throw ValidationError("fine-tune epochs must be >= 1");
  if (model_id.empty()) throw ValidationError("fine-tune model_id must be non-empty");
}

std::vector<Label> Cohort::labels() const {
  std::vector<Label> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

namespace {

std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name) {
  const std::string wanted = text::to_lower(text::trim(name));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (text::to_lower(text::trim(header[i])) == wanted) return i;
  }
  throw SchemaError(name);
}

bool blank_row(const std::vector<std::string>& row) {
  return std::all_of(row.begin(), row.end(),
                     [](const std::string& f) { return text::trim(f).empty(); });
}

std::string clean(std::string_view s) { return text::to_lower(text::trim(s)); }

}  // namespace

IngestResult ingest_pairs(std::istream& source, const SchemaMap& schema) {
  std::vector<std::string> header;
  if (!text::read_csv_row(source, header) || blank_row(header)) {
    throw EmptyInputError("empty input: table has no header row");
  }
  // Strip a UTF-8 byte order mark from the first header cell.
  if (header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  const std::size_t drug_col = column_index(header, schema.drug_name);
  const std::size_t cell_col = column_index(header, schema.cell_line);
  const std::size_t tissue_col = column_index(header, schema.tissue);
  const std::size_t ic50_col = column_index(header, schema.ln_ic50);
  std::optional<std::size_t> target_col;
  if (schema.drug_target) target_col = column_index(header, *schema.drug_target);

  std::size_t needed = std::max({drug_col, cell_col, tissue_col, ic50_col});
  if (target_col) needed = std::max(needed, *target_col);

  IngestResult result;
  std::vector<std::string> row;
  std::size_t row_number = 0;
  while (text::read_csv_row(source, row)) {
    if (blank_row(row)) continue;
    ++row_number;
    if (row.size() <= needed) {
      result.rejected.push_back(
          {row_number, "row " + std::to_string(row_number) + ": expected at least " +
                           std::to_string(needed + 1) + " columns, found " +
                           std::to_string(row.size())});
      continue;
    }
    const auto ic50 = text::parse_double(row[ic50_col]);
    if (!ic50) {
      result.rejected.push_back({row_number, "row " + std::to_string(row_number) +
                                                 ": unparseable ln_ic50 '" +
                                                 row[ic50_col] + "'"});
      continue;
    }
    PairRecord rec;
    rec.drug_name = clean(row[drug_col]);
    rec.cell_line = clean(row[cell_col]);
    rec.tissue = Tissue(row[tissue_col]);
    rec.ln_ic50 = *ic50;
    if (target_col) {
      std::string target = clean(row[*target_col]);
      if (!target.empty()) rec.drug_target = std::move(target);
    }
    if (rec.drug_name.empty() || rec.cell_line.empty() || rec.tissue.code().empty()) {
      result.rejected.push_back(
          {row_number, "row " + std::to_string(row_number) +
                           ": drug_name, cell_line and tissue must be non-empty"});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

namespace {

template <typename Fn>
void read_pairs(std::istream& source, bool has_header, Fn&& on_pair) {
  std::vector<std::string> row;
  bool first = true;
  std::size_t line = 0;
  while (text::read_csv_row(source, row)) {
    ++line;
    if (first && has_header) {
      first = false;
      continue;
    }
    first = false;
    if (blank_row(row)) continue;
    if (row.size() < 2) {
      throw ParseError(line, "expected two columns (key,value)");
    }
    on_pair(clean(row[0]), std::string(text::trim(row[1])));
  }
}

}  // namespace

SmilesMap read_smiles_map(std::istream& source, bool has_header) {
  SmilesMap out;
  read_pairs(source, has_header, [&](std::string key, std::string value) {
    if (!key.empty() && !value.empty()) out[std::move(key)] = std::move(value);
  });
  return out;
}

MutationMap read_mutation_map(std::istream& source, bool has_header) {
  MutationMap out;
  read_pairs(source, has_header, [&](std::string key, std::string value) {
    if (key.empty() || value.empty()) return;
    out[std::move(key)].push_back(text::to_lower(value));
  });
  return out;
}

std::vector<std::string> normalize_genes(std::vector<std::string> genes) {
  std::vector<std::string> out;
  out.reserve(genes.size());
  for (auto& g : genes) {
    std::string c = clean(g);
    if (!c.empty()) out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<PairRecord> attach_annotations(std::vector<PairRecord> records,
                                           const SmilesMap& smiles,
                                           const MutationMap& mutations) {
  for (auto& rec : records) {
    if (auto it = smiles.find(rec.drug_name); it != smiles.end() && !it->second.empty()) {
      rec.smiles = it->second;
    }
    if (auto it = mutations.find(rec.cell_line); it != mutations.end()) {
      auto genes = normalize_genes(it->second);
      if (!genes.empty()) rec.mutations = std::move(genes);
    }
  }
  return records;
}

Label binarize_response(double ln_ic50, const LabelPolicy& policy) {
  if (!std::isfinite(ln_ic50)) {
    throw DomainError("ln_ic50 must be finite");
  }
  if (!std::isfinite(policy.theta)) {
    throw DomainError("label threshold must be finite");
  }
  return ln_ic50 < policy.theta ? Label::kSensitive : Label::kResistant;
}

Cohort build_cohort(const std::vector<PairRecord>& records, const Tissue& tissue,
                    const LabelPolicy& policy) {
  Cohort cohort;
  cohort.tissue = tissue;
  for (const auto& rec : records) {
    if (rec.tissue != tissue) continue;
    cohort.records.push_back({rec, binarize_response(rec.ln_ic50, policy)});
  }
  return cohort;
}

Cohort filter_by_features(const Cohort& cohort, const FeatureSet& fs) {
  Cohort out;
  out.tissue = cohort.tissue;
  for (const auto& lr : cohort.records) {
    bool keep = true;
    for (Feature f : fs.features()) keep = keep && lr.record.has(f);
    if (keep) out.records.push_back(lr);
  }
  return out;
}

namespace {

// Uniform draw in [0, bound) with rejection, so the sequence depends only on
// the engine output and not on the standard library's distributions.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded(rng, i)]);
  }
}

// Snap values within 1e-9 of an integer, so 0.29 * 100 floors to 29.
double snapped(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < 1e-9 ? r : x;
}

}  // namespace

SplitResult stratified_split(const Cohort& cohort, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw SplitError("train_fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = cohort.size();
  if (n < 2) {
    throw SplitError("cohort needs at least 2 records to split, has " + std::to_string(n));
  }

  struct Stratum {
    std::string name;
    std::vector<std::size_t> members;
    std::size_t train = 0;
    double remainder = 0.0;
  };
  // Class-name order: "resistant" < "sensitive".
  std::vector<Stratum> strata;
  for (Label l : {Label::kResistant, Label::kSensitive}) {
    Stratum s;
    s.name = std::string(to_string(l));
    for (std::size_t i = 0; i < n; ++i) {
      if (cohort.records[i].label == l) s.members.push_back(i);
    }
    if (!s.members.empty()) strata.push_back(std::move(s));
  }
  std::sort(strata.begin(), strata.end(),
            [](const Stratum& a, const Stratum& b) { return a.name < b.name; });

  std::size_t assigned = 0;
  for (auto& s : strata) {
    const double exact = snapped(static_cast<double>(s.members.size()) * spec.train_fraction);
    s.train = static_cast<std::size_t>(std::floor(exact));
    s.remainder = exact - std::floor(exact);
    assigned += s.train;
  }
  const auto target = static_cast<std::size_t>(
      std::llround(snapped(static_cast<double>(n) * spec.train_fraction)));

  std::vector<Stratum*> order;
  for (auto& s : strata) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const Stratum* a, const Stratum* b) {
    if (a->remainder != b->remainder) return a->remainder > b->remainder;
    return a->name < b->name;
  });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    if (order[k]->train < order[k]->members.size()) {
      ++order[k]->train;
      ++assigned;
    }
  }

  if (assigned == 0 || assigned == n) {
    throw SplitError("split of " + std::to_string(n) +
                     " records leaves the train or test side empty");
  }

  std::mt19937_64 rng(spec.seed);
  SplitResult result;
  for (auto& s : strata) {
    seeded_shuffle(s.members, rng);
    result.train_indices.insert(result.train_indices.end(), s.members.begin(),
                                s.members.begin() + static_cast<std::ptrdiff_t>(s.train));
    result.test_indices.insert(result.test_indices.end(),
                               s.members.begin() + static_cast<std::ptrdiff_t>(s.train),
                               s.members.end());
  }
  std::sort(result.train_indices.begin(), result.train_indices.end());
  std::sort(result.test_indices.begin(), result.test_indices.end());
  return result;
}

}  // namespace oncoprompt
