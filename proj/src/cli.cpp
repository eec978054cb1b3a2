#include "oncoprompt/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "oncoprompt/artifacts.hpp"
#include "oncoprompt/error.hpp"
#include "oncoprompt/evaluator.hpp"
#include "oncoprompt/prompt.hpp"
#include "oncoprompt/service.hpp"
#include "oncoprompt/smiles_lint.hpp"
#include "oncoprompt/text.hpp"

namespace oncoprompt::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kUsageText =
    "usage: oncoprompt <command> --config <file> [options]\n"
    "\n"
    "commands:\n"
    "  ingest           read the pairs table and annotation maps, write per-tissue cohorts\n"
    "  ablate           build feature-set variants and print their sizes\n"
    "  split            stratified train/test split per variant\n"
    "  prompts          export zero-shot prompts for each test set (id,prompt CSV)\n"
    "  export-finetune  write train/test prompt-completion JSONL\n"
    "  predict          query the backend for every test prompt\n"
    "  evaluate         score predictions and write per-variant reports\n"
    "  report           merge per-variant reports into <out>/report.{json,csv,md}\n"
    "  serve            run the prediction HTTP service\n";

const std::set<std::string>& commands() {
  static const std::set<std::string> names = {"ingest",  "ablate",   "split",  "prompts",
                                              "export-finetune", "predict", "evaluate",
                                              "report", "serve"};
  return names;
}

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta;
  std::optional<std::string> features;
  std::vector<std::string> tissues;
  std::optional<std::string> setting;
  std::optional<std::size_t> parallelism;
  std::optional<int> port;
};

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = load_run_config(o.config_path);
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) cfg.split.seed = *o.seed;
  if (o.theta) cfg.policy.theta = *o.theta;
  if (o.features) cfg.feature_sets = {FeatureSet::parse(*o.features)};
  if (!o.tissues.empty()) {
    cfg.tissues.clear();
    for (const auto& t : o.tissues) {
      for (const auto& part : text::split(t, ',')) {
        if (!text::trim(part).empty()) cfg.tissues.emplace_back(part);
      }
    }
  }
  if (o.setting) cfg.setting = parse_setting(*o.setting);
  if (o.parallelism) cfg.parallelism = *o.parallelism;
  if (o.port) cfg.service.port = *o.port;
  cfg.validate();
  return cfg;
}

std::string file_digest(const fs::path& path) {
  if (path.empty()) return "";
  return text::sha256_hex(read_file(path));
}

class Pipeline {
 public:
  Pipeline(RunConfig cfg, std::ostream& out, std::ostream& err)
      : cfg_(std::move(cfg)), out_(out), err_(err), digest_(config_digest(cfg_)) {}

  int ingest();
  int ablate();
  int split();
  int prompts();
  int export_finetune();
  int predict();
  int evaluate();
  int report();
  int serve();

 private:
  fs::path tissue_dir(const Tissue& t) const { return cfg_.output_dir / t.code(); }
  fs::path variant_dir(const Tissue& t, const FeatureSet& f) const {
    return tissue_dir(t) / f.key();
  }
  std::vector<Tissue> tissues() const;
  Cohort load_cohort(const fs::path& path) const {
    return cohort_from_json(read_artifact(path, digest_));
  }
  SplitResult load_split(const Tissue& t, const FeatureSet& f) const {
    return split_from_json(read_artifact(variant_dir(t, f) / "split.json", digest_));
  }
  std::string prompt_for(const PairRecord& rec, const FeatureSet& f) const {
    return cfg_.setting == Setting::kZeroShot
               ? serialize_zero_shot(rec, f, cfg_.order).full_text
               : serialize_finetune_prompt(rec, f, cfg_.order);
  }

  RunConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
  std::string digest_;
};

std::vector<Tissue> Pipeline::tissues() const {
  if (!cfg_.tissues.empty()) {
    auto t = cfg_.tissues;
    std::sort(t.begin(), t.end());
    return t;
  }
  const auto summary = read_artifact(cfg_.output_dir / "ingest.json", digest_);
  std::vector<Tissue> out;
  for (const auto& [code, _] : summary.at("tissues").items()) out.emplace_back(code);
  std::sort(out.begin(), out.end());
  return out;
}

int Pipeline::ingest() {
  std::ifstream pairs(cfg_.pairs_path, std::ios::binary);
  if (!pairs) throw IoError("cannot open pairs table " + cfg_.pairs_path.string());
  IngestResult ingested = ingest_pairs(pairs, cfg_.schema);

  SmilesMap smiles;
  MutationMap mutations;
  if (!cfg_.smiles_path.empty()) {
    std::ifstream in(cfg_.smiles_path, std::ios::binary);
    if (!in) throw IoError("cannot open smiles map " + cfg_.smiles_path.string());
    smiles = read_smiles_map(in);
  }
  if (!cfg_.mutations_path.empty()) {
    std::ifstream in(cfg_.mutations_path, std::ios::binary);
    if (!in) throw IoError("cannot open mutation map " + cfg_.mutations_path.string());
    mutations = read_mutation_map(in);
  }
  std::vector<std::string> lint_failures;
  for (const auto& [drug, s] : smiles) {
    if (!validate_smiles_lite(s)) lint_failures.push_back(drug);
  }
  auto records = attach_annotations(std::move(ingested.records), smiles, mutations);

  std::vector<Tissue> targets = cfg_.tissues;
  if (targets.empty()) {
    std::set<std::string> seen;
    for (const auto& r : records) {
      if (seen.insert(r.tissue.code()).second) targets.push_back(r.tissue);
    }
  }
  std::sort(targets.begin(), targets.end());

  ordered_json summary;
  summary["rows_accepted"] = records.size();
  summary["rows_rejected"] = ingested.rejected.size();
  summary["rejected"] = ordered_json::array();
  for (const auto& d : ingested.rejected) {
    summary["rejected"].push_back({{"row", d.row}, {"message", d.message}});
  }
  summary["smiles_lint_failures"] = lint_failures;
  summary["tissues"] = ordered_json::object();
  for (const auto& t : targets) {
    const Cohort cohort = build_cohort(records, t, cfg_.policy);
    write_artifact(tissue_dir(t) / "cohort.json", cohort_to_json(cohort), digest_);
    summary["tissues"][t.code()] = cohort.size();
    out_ << t.code() << ": " << cohort.size() << " drug-cell line pairs\n";
  }
  write_artifact(cfg_.output_dir / "ingest.json", summary, digest_);
  for (const auto& d : ingested.rejected) err_ << "warning: " << d.message << '\n';
  for (const auto& drug : lint_failures) {
    err_ << "warning: SMILES for '" << drug << "' fails the lint check\n";
  }
  return kOk;
}

int Pipeline::ablate() {
  for (const auto& t : tissues()) {
    const Cohort base = load_cohort(tissue_dir(t) / "cohort.json");
    out_ << t.code() << " (" << base.size() << ")\n";
    ordered_json sizes = ordered_json::object();
    for (const auto& f : cfg_.feature_sets) {
      const Cohort variant = filter_by_features(base, f);
      ordered_json doc = cohort_to_json(variant);
      doc["features"] = f.csv();
      write_artifact(variant_dir(t, f) / "cohort.json", doc, digest_);
      sizes[f.key()] = variant.size();
      out_ << "  " << f.phrase() << " (" << variant.size() << ")\n";
    }
    write_artifact(tissue_dir(t) / "ablation.json", {{"tissue", t.code()}, {"sizes", sizes}},
                   digest_);
  }
  return kOk;
}

int Pipeline::split() {
  for (const auto& t : tissues()) {
    for (const auto& f : cfg_.feature_sets) {
      const Cohort cohort = load_cohort(variant_dir(t, f) / "cohort.json");
      const SplitResult s = stratified_split(cohort, cfg_.split);
      write_artifact(variant_dir(t, f) / "split.json", split_to_json(s, cfg_.split, cohort),
                     digest_);
      out_ << t.code() << " " << f.key() << ": train " << s.train_indices.size() << ", test "
           << s.test_indices.size() << '\n';
    }
  }
  return kOk;
}

int Pipeline::prompts() {
  for (const auto& t : tissues()) {
    for (const auto& f : cfg_.feature_sets) {
      const Cohort cohort = load_cohort(variant_dir(t, f) / "cohort.json");
      const SplitResult s = load_split(t, f);
      std::vector<PromptRow> rows;
      for (auto i : s.test_indices) {
        rows.push_back({std::to_string(i),
                        serialize_zero_shot(cohort.records.at(i).record, f, cfg_.order).full_text});
      }
      std::ostringstream csv;
      write_prompt_csv(rows, csv);
      write_file_atomic(variant_dir(t, f) / "zero_shot_prompts.csv", csv.str());
      out_ << t.code() << " " << f.key() << ": " << rows.size() << " zero-shot prompts\n";
    }
  }
  return kOk;
}

int Pipeline::export_finetune() {
  for (const auto& t : tissues()) {
    for (const auto& f : cfg_.feature_sets) {
      const Cohort cohort = load_cohort(variant_dir(t, f) / "cohort.json");
      const SplitResult s = load_split(t, f);
      for (const auto& [name, idx] : {std::pair{"train", &s.train_indices},
                                      std::pair{"test", &s.test_indices}}) {
        std::vector<FinetunePromptPair> pairs;
        for (auto i : *idx) {
          const auto& lr = cohort.records.at(i);
          pairs.push_back({serialize_finetune_prompt(lr.record, f, cfg_.order),
                           make_completion(lr.label)});
        }
        std::ostringstream buf;
        emit_finetune_jsonl(pairs, buf);
        write_file_atomic(variant_dir(t, f) / (std::string(name) + ".jsonl"), buf.str());
      }
      ordered_json spec;
      spec["model_id"] = cfg_.finetune.model_id;
      spec["epochs"] = cfg_.finetune.epochs;
      spec["provider"] = cfg_.finetune.provider;
      spec["training_file"] = "train.jsonl";
      spec["validation_file"] = "test.jsonl";
      write_artifact(variant_dir(t, f) / "finetune_spec.json", spec, digest_);
      out_ << t.code() << " " << f.key() << ": " << s.train_indices.size() << " train / "
           << s.test_indices.size() << " test pairs\n";
    }
  }
  return kOk;
}

int Pipeline::predict() {
  auto cache = std::make_shared<ResponseCache>(cfg_.cache_dir.value_or(cfg_.output_dir / "cache"));
  Gateway gateway(cfg_.backend, make_backend(cfg_.backend), cache);
  bool any_failed = false;
  for (const auto& t : tissues()) {
    for (const auto& f : cfg_.feature_sets) {
      const Cohort cohort = load_cohort(variant_dir(t, f) / "cohort.json");
      const SplitResult s = load_split(t, f);
      std::vector<std::string> prompts;
      for (auto i : s.test_indices) prompts.push_back(prompt_for(cohort.records.at(i).record, f));

      const BatchResult batch = gateway.batch_predict(prompts, cfg_.parallelism);
      ordered_json doc;
      doc["model_id"] = cfg_.backend.model_id;
      doc["setting"] = to_string(cfg_.setting);
      doc["items"] = ordered_json::array();
      for (std::size_t k = 0; k < batch.predictions.size(); ++k) {
        doc["items"].push_back(prediction_to_json(s.test_indices[k], batch.predictions[k]));
      }
      std::vector<std::size_t> failed_rows;
      for (auto k : batch.failed_indices) failed_rows.push_back(s.test_indices[k]);
      doc["failed_indices"] = failed_rows;
      write_artifact(variant_dir(t, f) / "predictions.json", doc, digest_);
      out_ << t.code() << " " << f.key() << ": " << prompts.size() << " predictions";
      if (!failed_rows.empty()) {
        any_failed = true;
        out_ << ", " << failed_rows.size() << " failed (rows";
        for (auto r : failed_rows) out_ << ' ' << r;
        out_ << ")";
      }
      out_ << '\n';
    }
  }
  return any_failed ? kBackend : kOk;
}

int Pipeline::evaluate() {
  for (const auto& t : tissues()) {
    for (const auto& f : cfg_.feature_sets) {
      const Cohort cohort = load_cohort(variant_dir(t, f) / "cohort.json");
      const SplitResult s = load_split(t, f);
      const auto preds_doc = read_artifact(variant_dir(t, f) / "predictions.json", digest_);
      const auto& items = preds_doc.at("items");
      if (items.size() != s.test_indices.size()) {
        throw ValidationError("predictions do not cover the test split for " + t.code() + "/" +
                              f.key());
      }
      std::vector<Outcome> preds;
      std::vector<Label> golds;
      for (std::size_t k = 0; k < items.size(); ++k) {
        const Prediction p = prediction_from_json(items[k]);
        if (items[k].at("index").get<std::size_t>() != s.test_indices[k]) {
          throw ValidationError("prediction order does not match the split for " + t.code());
        }
        if (p.error) {
          throw ValidationError("prediction for row " + std::to_string(s.test_indices[k]) +
                                " failed; re-run predict");
        }
        preds.push_back(p.outcome);
        golds.push_back(cohort.records.at(s.test_indices[k]).label);
      }
      const std::vector<EvalReport> reports{build_report(preds, golds, t, cfg_.setting, f)};
      write_artifact(variant_dir(t, f) / "report.json", reports_to_json(reports), digest_);
      write_file_atomic(variant_dir(t, f) / "report.csv", render_report(reports, ReportFormat::kCsv));
      write_file_atomic(variant_dir(t, f) / "report.md",
                        render_report(reports, ReportFormat::kMarkdown));
      out_ << t.code() << " " << f.key() << ": macro-F1 " << reports[0].macro_f1
           << ", F1-Resistant " << reports[0].per_class.at(Label::kResistant).f1 << '\n';
    }
  }
  return kOk;
}

int Pipeline::report() {
  std::vector<EvalReport> all;
  for (const auto& t : tissues()) {
    for (const auto& f : cfg_.feature_sets) {
      const fs::path path = variant_dir(t, f) / "report.json";
      if (!fs::exists(path)) throw ValidationError("missing " + path.string() + "; run evaluate");
      auto reports = reports_from_json(read_artifact(path, digest_));
      all.insert(all.end(), reports.begin(), reports.end());
    }
  }
  if (all.empty()) throw ValidationError("no reports to merge");
  write_artifact(cfg_.output_dir / "report.json", reports_to_json(all), digest_);
  write_file_atomic(cfg_.output_dir / "report.csv", render_report(all, ReportFormat::kCsv));
  const std::string md = render_report(all, ReportFormat::kMarkdown);
  write_file_atomic(cfg_.output_dir / "report.md", md);
  out_ << md;
  return kOk;
}

int Pipeline::serve() {
  std::ostream& log = err_;
  const PredictionService service =
      make_service(cfg_, process_env, [&log](std::string_view line) { log << line << '\n'; });
  out_ << "serving on " << cfg_.service.host << ":" << cfg_.service.port << '\n' << std::flush;
  if (!oncoprompt::serve(service, cfg_.service.host, cfg_.service.port)) {
    throw IoError("cannot listen on " + cfg_.service.host + ":" +
                  std::to_string(cfg_.service.port));
  }
  return kOk;
}

}  // namespace

std::string config_digest(const RunConfig& cfg) {
  ordered_json c;
  c["inputs"]["pairs"] = file_digest(cfg.pairs_path);
  c["inputs"]["smiles"] = file_digest(cfg.smiles_path);
  c["inputs"]["mutations"] = file_digest(cfg.mutations_path);
  c["schema"] = {cfg.schema.drug_name, cfg.schema.drug_target.value_or(""), cfg.schema.cell_line,
                 cfg.schema.tissue, cfg.schema.ln_ic50};
  c["theta"] = cfg.policy.theta;
  c["split"] = {{"train_fraction", cfg.split.train_fraction}, {"seed", cfg.split.seed}};
  c["setting"] = to_string(cfg.setting);
  c["order"] = cfg.order.csv();
  const auto& b = cfg.backend;
  c["backend"]["kind"] = to_string(b.kind);
  c["backend"]["model_id"] = b.model_id;
  c["backend"]["temperature"] = b.temperature;
  c["backend"]["max_tokens"] = b.max_tokens;
  if (b.kind == BackendKind::kLive) {
    c["backend"]["endpoint_url"] = b.endpoint_url;
  } else {
    ordered_json rules = ordered_json::array();
    for (const auto& [marker, label] : b.mock.markers) rules.push_back({marker, to_string(label)});
    c["backend"]["mock_rules"] = rules;
    c["backend"]["mock_default"] = to_string(b.mock.fallback);
  }
  c["finetune"] = {cfg.finetune.model_id, cfg.finetune.epochs, cfg.finetune.provider};
  return text::sha256_hex(c.dump());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "-h" || args[0] == "--help" || args[0] == "help") {
    (args.empty() ? err : out) << kUsageText;
    return args.empty() ? kUsage : kOk;
  }
  if (!commands().count(args[0])) {
    err << "unknown command '" << args[0] << "'\n\n" << kUsageText;
    return kUsage;
  }

  CLI::App app{"oncoprompt " + args[0], "oncoprompt " + args[0]};
  Overrides o;
  std::uint64_t seed = 0;
  double theta = 0;
  std::string out_dir, features, setting;
  std::size_t parallelism = 0;
  int port = 0;
  app.add_option("--config", o.config_path, "run configuration file")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "split seed");
  auto* theta_opt = app.add_option("--theta", theta, "ln(IC50) threshold");
  auto* feat_opt = app.add_option("--features", features, "feature set, e.g. drug,cell_line,smiles");
  app.add_option("--tissue", o.tissues, "restrict to tissue code(s)");
  auto* setting_opt = app.add_option("--setting", setting, "zero_shot or fine_tuned");
  auto* par_opt = app.add_option("--parallelism", parallelism, "in-flight backend requests")
                      ->check(CLI::PositiveNumber);
  auto* port_opt = app.add_option("--port", port, "service port (serve)")->check(CLI::Range(0, 65535));

  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (*out_opt) o.out = out_dir;
  if (*seed_opt) o.seed = seed;
  if (*theta_opt) o.theta = theta;
  if (*feat_opt) o.features = features;
  if (*setting_opt) o.setting = setting;
  if (*par_opt) o.parallelism = parallelism;
  if (*port_opt) o.port = port;

  try {
    Pipeline p(resolve(o), out, err);
    const std::string& cmd = args[0];
    if (cmd == "ingest") return p.ingest();
    if (cmd == "ablate") return p.ablate();
    if (cmd == "split") return p.split();
    if (cmd == "prompts") return p.prompts();
    if (cmd == "export-finetune") return p.export_finetune();
    if (cmd == "predict") return p.predict();
    if (cmd == "evaluate") return p.evaluate();
    if (cmd == "report") return p.report();
    return p.serve();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const BackendError& e) {
    err << "error: " << e.what() << '\n';
    return kBackend;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace oncoprompt::cli
