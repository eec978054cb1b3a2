#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "oncoprompt/types.hpp"

namespace oncoprompt {

/// Counts for one positive class. An Unparseable prediction is scored as
/// the class opposite to gold and also tallied in `unparseable`.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t unparseable = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

enum class Setting { kZeroShot, kFineTuned };

std::string_view to_string(Setting setting);
Setting parse_setting(std::string_view text);

struct EvalReport {
  Tissue tissue;
  Setting setting = Setting::kZeroShot;
  FeatureSet feature_set;
  std::map<Label, ClassMetrics> per_class;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  ConfusionCounts counts;  // Sensitive as the positive class
  std::size_t n = 0;
};

/// Throws ContractError on length mismatch or empty input.
ConfusionCounts confusion(const std::vector<Outcome>& preds, const std::vector<Label>& golds,
                          Label positive);

/// Zero denominators give 0 for precision, recall and F1.
ClassMetrics class_metrics(const ConfusionCounts& c);

EvalReport build_report(const std::vector<Outcome>& preds, const std::vector<Label>& golds,
                        const Tissue& tissue, Setting setting, const FeatureSet& feature_set);

enum class ReportFormat { kJson, kCsv, kMarkdown };

ReportFormat parse_report_format(std::string_view text);

/// Rows sorted by tissue listing order (LUAD, BRCA, COREAD, THCA, LGG,
/// others), stable otherwise. Columns: tissue, setting, features,
/// F1-Sensitive, F1-Resistant, macro-F1, weighted-F1, accuracy, n,
/// unparseable. Throws ContractError on an empty list.
std::string render_report(const std::vector<EvalReport>& reports, ReportFormat format);

/// {"version":1,"reports":[...]} in the same row order as render_report.
nlohmann::ordered_json reports_to_json(const std::vector<EvalReport>& reports);
/// Inverse of reports_to_json; throws ParseError on schema violations.
std::vector<EvalReport> reports_from_json(const nlohmann::json& doc);

}  // namespace oncoprompt
