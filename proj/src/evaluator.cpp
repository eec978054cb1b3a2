#include "oncoprompt/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "oncoprompt/error.hpp"

namespace oncoprompt {

std::string_view to_string(Setting setting) {
  return setting == Setting::kZeroShot ? "zero_shot" : "fine_tuned";
}

Setting parse_setting(std::string_view text) {
  if (text == "zero_shot") return Setting::kZeroShot;
  if (text == "fine_tuned") return Setting::kFineTuned;
  throw ValidationError("unknown setting '" + std::string(text) +
                        "' (expected zero_shot or fine_tuned)");
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "markdown" || text == "markdown-table" || text == "md") return ReportFormat::kMarkdown;
  throw ValidationError("unknown report format '" + std::string(text) + "'");
}

namespace {

Label opposite(Label l) {
  return l == Label::kSensitive ? Label::kResistant : Label::kSensitive;
}

}  // namespace

ConfusionCounts confusion(const std::vector<Outcome>& preds, const std::vector<Label>& golds,
                          Label positive) {
  if (preds.size() != golds.size()) {
    throw ContractError("predictions and gold labels differ in length (" +
                        std::to_string(preds.size()) + " vs " + std::to_string(golds.size()) + ")");
  }
  if (preds.empty()) throw ContractError("cannot score an empty prediction list");

  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Label gold = golds[i];
    Label called;
    if (preds[i] == Outcome::kUnparseable) {
      ++c.unparseable;
      called = opposite(gold);
    } else {
      called = preds[i] == Outcome::kSensitive ? Label::kSensitive : Label::kResistant;
    }
    const bool gold_pos = gold == positive;
    const bool called_pos = called == positive;
    if (gold_pos && called_pos) ++c.tp;
    else if (!gold_pos && called_pos) ++c.fp;
    else if (gold_pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

ClassMetrics class_metrics(const ConfusionCounts& c) {
  ClassMetrics m;
  if (c.tp + c.fp > 0) m.precision = double(c.tp) / double(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = double(c.tp) / double(c.tp + c.fn);
  if (c.tp > 0 && m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

EvalReport build_report(const std::vector<Outcome>& preds, const std::vector<Label>& golds,
                        const Tissue& tissue, Setting setting, const FeatureSet& feature_set) {
  EvalReport r;
  r.tissue = tissue;
  r.setting = setting;
  r.feature_set = feature_set;
  r.counts = confusion(preds, golds, Label::kSensitive);
  const ConfusionCounts resistant = confusion(preds, golds, Label::kResistant);
  r.n = preds.size();

  r.per_class[Label::kSensitive] = class_metrics(r.counts);
  r.per_class[Label::kResistant] = class_metrics(resistant);

  const double support_s = double(r.counts.tp + r.counts.fn);
  const double support_r = double(resistant.tp + resistant.fn);
  const double f1_s = r.per_class[Label::kSensitive].f1;
  const double f1_r = r.per_class[Label::kResistant].f1;
  r.macro_f1 = (f1_s + f1_r) / 2.0;
  r.weighted_f1 = (support_s * f1_s + support_r * f1_r) / double(r.n);
  r.accuracy = double(r.counts.tp + r.counts.tn) / double(r.n);
  return r;
}

namespace {

std::vector<EvalReport> ordered(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw ContractError("render_report needs at least one report");
  std::vector<EvalReport> rows = reports;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const EvalReport& a, const EvalReport& b) { return a.tissue < b.tissue; });
  return rows;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::ordered_json metrics_json(const ClassMetrics& m) {
  nlohmann::ordered_json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  return j;
}

}  // namespace

nlohmann::ordered_json reports_to_json(const std::vector<EvalReport>& reports) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : ordered(reports)) {
    nlohmann::ordered_json j;
    j["tissue"] = r.tissue.code();
    j["setting"] = to_string(r.setting);
    j["features"] = r.feature_set.csv();
    j["per_class"]["sensitive"] = metrics_json(r.per_class.at(Label::kSensitive));
    j["per_class"]["resistant"] = metrics_json(r.per_class.at(Label::kResistant));
    j["macro_f1"] = r.macro_f1;
    j["weighted_f1"] = r.weighted_f1;
    j["accuracy"] = r.accuracy;
    j["n"] = r.n;
    j["counts"] = {{"positive", "sensitive"}, {"tp", r.counts.tp}, {"fp", r.counts.fp},
                   {"fn", r.counts.fn},       {"tn", r.counts.tn}, {"unparseable", r.counts.unparseable}};
    doc["reports"].push_back(std::move(j));
  }
  return doc;
}

std::vector<EvalReport> reports_from_json(const nlohmann::json& doc) {
  std::vector<EvalReport> out;
  try {
    if (doc.at("version").get<int>() != 1) throw ParseError(1, "unsupported report version");
    for (const auto& j : doc.at("reports")) {
      EvalReport r;
      r.tissue = Tissue(j.at("tissue").get<std::string>());
      r.setting = parse_setting(j.at("setting").get<std::string>());
      r.feature_set = FeatureSet::parse(j.at("features").get<std::string>());
      for (Label l : {Label::kSensitive, Label::kResistant}) {
        const auto& m = j.at("per_class").at(std::string(to_string(l)));
        r.per_class[l] = {m.at("precision").get<double>(), m.at("recall").get<double>(),
                          m.at("f1").get<double>()};
      }
      r.macro_f1 = j.at("macro_f1").get<double>();
      r.weighted_f1 = j.at("weighted_f1").get<double>();
      r.accuracy = j.at("accuracy").get<double>();
      r.n = j.at("n").get<std::size_t>();
      const auto& c = j.at("counts");
      r.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                  c.at("fn").get<std::size_t>(), c.at("tn").get<std::size_t>(),
                  c.at("unparseable").get<std::size_t>()};
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("malformed report: ") + e.what());
  }
  return out;
}

std::string render_report(const std::vector<EvalReport>& reports, ReportFormat format) {
  if (format == ReportFormat::kJson) return reports_to_json(reports).dump(2) + "\n";

  const auto rows = ordered(reports);
  std::ostringstream out;
  if (format == ReportFormat::kCsv) {
    out << "tissue,setting,features,f1_sensitive,f1_resistant,macro_f1,weighted_f1,accuracy,n,"
           "unparseable\n";
    for (const auto& r : rows) {
      out << r.tissue.code() << ',' << to_string(r.setting) << ',' << r.feature_set.key() << ','
          << fixed(r.per_class.at(Label::kSensitive).f1, 6) << ','
          << fixed(r.per_class.at(Label::kResistant).f1, 6) << ',' << fixed(r.macro_f1, 6) << ','
          << fixed(r.weighted_f1, 6) << ',' << fixed(r.accuracy, 6) << ',' << r.n << ','
          << r.counts.unparseable << '\n';
    }
    return out.str();
  }

  out << "| Tissue | Setting | Features | F1-Sensitive | F1-Resistant | Macro-F1 | Weighted-F1 "
         "| Accuracy | n | Unparseable |\n";
  out << "|---|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out << "| " << r.tissue.code() << " | " << to_string(r.setting) << " | "
        << r.feature_set.phrase() << " | " << fixed(r.per_class.at(Label::kSensitive).f1, 4)
        << " | " << fixed(r.per_class.at(Label::kResistant).f1, 4) << " | "
        << fixed(r.macro_f1, 4) << " | " << fixed(r.weighted_f1, 4) << " | "
        << fixed(r.accuracy, 4) << " | " << r.n << " | " << r.counts.unparseable << " |\n";
  }
  return out.str();
}

}  // namespace oncoprompt
