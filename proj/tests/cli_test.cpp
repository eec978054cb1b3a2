#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "oncoprompt/cli.hpp"
#include "oracles.hpp"

namespace oncoprompt {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Copy of the bundled fixture in a fresh directory.
class Workspace {
 public:
  Workspace() {
    static std::atomic<int> counter{0};
    dir_ = fs::temp_directory_path() /
           ("oncoprompt_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    for (const char* f : {"pairs.csv", "smiles.csv", "mutations.csv", "run.toml"}) {
      fs::copy_file(fs::path(ONCOPROMPT_FIXTURE_DIR) / f, dir_ / f);
    }
  }
  ~Workspace() { fs::remove_all(dir_); }

  fs::path config() const { return dir_ / "run.toml"; }
  fs::path out() const { return dir_ / "out"; }

  int run(std::vector<std::string> args, std::string* stdout_text = nullptr,
          std::string* stderr_text = nullptr) const {
    args.push_back("--config");
    args.push_back(config().string());
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    if (stdout_text) *stdout_text = out.str();
    if (stderr_text) *stderr_text = err.str();
    return rc;
  }

  void run_chain() const {
    for (const char* cmd : {"ingest", "ablate", "split", "prompts", "export-finetune", "predict",
                            "evaluate", "report"}) {
      std::string err;
      ASSERT_EQ(run({cmd}, nullptr, &err), 0) << cmd << ": " << err;
    }
  }

 private:
  fs::path dir_;
};

TEST(CliTest, UnknownOrMissingCommandIsUsageError) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::run({"frobnicate"}, out, err), cli::kUsage);
  EXPECT_NE(err.str().find("unknown command"), std::string::npos);
  EXPECT_EQ(cli::run({}, out, err), cli::kUsage);
  EXPECT_EQ(cli::run({"ingest"}, out, err), cli::kUsage);
  EXPECT_EQ(cli::run({"--help"}, out, err), cli::kOk);
  EXPECT_EQ(cli::run({"split", "--config", "x.toml", "--seed", "abc"}, out, err), cli::kUsage);
}

TEST(CliTest, ConfigProblemsMapToExitCodes) {
  Workspace ws;
  std::ostringstream out, err;
  EXPECT_EQ(cli::run({"ingest", "--config", "/nonexistent/run.toml"}, out, err), cli::kIo);
  { std::ofstream(ws.config(), std::ios::app) << "[bogus]\nkey = 1\n"; }
  EXPECT_EQ(ws.run({"ingest"}), cli::kValidation);
}

TEST(CliTest, SplitBeforeIngestIsAnIoError) {
  Workspace ws;
  std::string err;
  EXPECT_EQ(ws.run({"split"}, nullptr, &err), cli::kIo);
  EXPECT_FALSE(err.empty());
}

TEST(CliTest, AblateReportsSizesPerFeatureSet) {
  Workspace ws;
  ASSERT_EQ(ws.run({"ingest"}), 0);
  std::string out;
  ASSERT_EQ(ws.run({"ablate"}, &out), 0);
  EXPECT_EQ(out,
            "LUAD (1000)\n"
            "  drug + cell line (1000)\n"
            "  drug + cell line + smile (625)\n"
            "  drug + cell line + mutation (600)\n"
            "  drug + cell line + smile + mutation (375)\n");

  // Independent count straight from the fixture files.
  const auto rows = oracle::read_fixture(ONCOPROMPT_FIXTURE_DIR);
  std::size_t smiles = 0, mutation = 0, both = 0;
  for (const auto& r : rows) {
    smiles += r.has_smiles;
    mutation += !r.genes.empty();
    both += r.has_smiles && !r.genes.empty();
  }
  EXPECT_EQ(smiles, 625u);
  EXPECT_EQ(mutation, 600u);
  EXPECT_EQ(both, 375u);
}

TEST(CliTest, FullChainMatchesGoldenReports) {
  Workspace ws;
  ws.run_chain();
  for (const char* f : {"report.csv", "report.md", "report.json"}) {
    EXPECT_EQ(slurp(ws.out() / f), slurp(fs::path(ONCOPROMPT_GOLDEN_DIR) / f)) << f;
  }
}

TEST(CliTest, RepeatedRunsAreByteIdentical) {
  Workspace a, b;
  a.run_chain();
  b.run_chain();
  for (const char* f : {"report.csv", "report.md", "report.json", "ingest.json",
                        "LUAD/drug+cell_line/split.json", "LUAD/drug+cell_line/train.jsonl",
                        "LUAD/drug+cell_line+smiles+mutation/predictions.json"}) {
    EXPECT_EQ(slurp(a.out() / f), slurp(b.out() / f)) << f;
  }
}

// Recomputes every report row from the fixture: labels from ln_ic50 < -2,
// mock calls from the configured markers, metrics from the brute-force
// scorer.
TEST(CliTest, ReportsAgreeWithIndependentRecomputation) {
  Workspace ws;
  ws.run_chain();
  std::map<std::pair<std::string, std::string>, oracle::FixtureRow> by_pair;
  for (const auto& r : oracle::read_fixture(ONCOPROMPT_FIXTURE_DIR)) {
    by_pair[{r.drug, r.cell}] = r;
  }
  const auto report = json::parse(slurp(ws.out() / "report.json"));
  ASSERT_EQ(report["reports"].size(), 4u);
  for (const auto& row : report["reports"]) {
    std::string key = row["features"].get<std::string>();
    std::replace(key.begin(), key.end(), ',', '+');
    const bool uses_mutation = key.find("mutation") != std::string::npos;
    const fs::path variant = ws.out() / "LUAD" / key;
    const auto cohort = json::parse(slurp(variant / "cohort.json"));
    const auto split = json::parse(slurp(variant / "split.json"));
    const auto preds = json::parse(slurp(variant / "predictions.json"));
    ASSERT_EQ(preds["items"].size(), split["test_indices"].size());

    std::string p, g;
    for (const auto& item : preds["items"]) {
      const auto& rec = cohort["records"][item["index"].get<std::size_t>()];
      const auto& fx = by_pair.at({rec["drug_name"].get<std::string>(),
                                   rec["cell_line"].get<std::string>()});
      g += fx.ln_ic50 < -2.0 ? 'S' : 'R';
      char expected = 'S';
      if (uses_mutation) {
        auto has = [&](const char* gene) {
          return std::find(fx.genes.begin(), fx.genes.end(), gene) != fx.genes.end();
        };
        if (has("crebbp")) expected = 'S';
        else if (has("kras") || has("tp53")) expected = 'R';
      }
      const std::string outcome = item["outcome"].get<std::string>();
      p += outcome == "sensitive" ? 'S' : 'R';
      EXPECT_EQ(p.back(), expected) << key << " index " << item["index"];
    }
    const auto want = oracle::score(p, g);
    EXPECT_NEAR(row["per_class"]["sensitive"]["f1"].get<double>(), want.f1_s, 1e-12) << key;
    EXPECT_NEAR(row["per_class"]["resistant"]["f1"].get<double>(), want.f1_r, 1e-12) << key;
    EXPECT_NEAR(row["macro_f1"].get<double>(), want.macro_f1, 1e-12) << key;
    EXPECT_NEAR(row["weighted_f1"].get<double>(), want.weighted_f1, 1e-12) << key;
    EXPECT_NEAR(row["accuracy"].get<double>(), want.accuracy, 1e-12) << key;
    EXPECT_EQ(row["n"].get<std::size_t>(), p.size());
  }
}

TEST(CliTest, ArtifactsFromAnotherConfigAreRefused) {
  Workspace ws;
  ws.run_chain();
  std::string err;
  EXPECT_EQ(ws.run({"evaluate", "--theta", "-1.5"}, nullptr, &err), cli::kValidation);
  EXPECT_NE(err.find("different configuration"), std::string::npos) << err;
  EXPECT_EQ(ws.run({"predict", "--seed", "7"}, nullptr, &err), cli::kValidation);
}

TEST(CliTest, DigestIgnoresOutputAndTuningKnobs) {
  Workspace ws;
  auto cfg = load_run_config(ws.config());
  const auto base = cli::config_digest(cfg);
  cfg.output_dir = "/elsewhere";
  cfg.parallelism = 16;
  cfg.backend.retry.max_attempts = 9;
  EXPECT_EQ(cli::config_digest(cfg), base);
  cfg.split.seed = 43;
  EXPECT_NE(cli::config_digest(cfg), base);
  cfg = load_run_config(ws.config());
  cfg.backend.model_id = "babbage";
  EXPECT_NE(cli::config_digest(cfg), base);
  { std::ofstream(ws.config().parent_path() / "pairs.csv", std::ios::app) << "\n"; }
  EXPECT_NE(cli::config_digest(load_run_config(ws.config())), base);
}

TEST(CliTest, ParallelismDoesNotChangePredictions) {
  Workspace a, b;
  for (const Workspace* ws : {&a, &b}) {
    for (const char* cmd : {"ingest", "ablate", "split"}) ASSERT_EQ(ws->run({cmd}), 0);
  }
  ASSERT_EQ(a.run({"predict", "--parallelism", "1"}), 0);
  ASSERT_EQ(b.run({"predict", "--parallelism", "8"}), 0);
  EXPECT_EQ(slurp(a.out() / "LUAD/drug+cell_line+mutation/predictions.json"),
            slurp(b.out() / "LUAD/drug+cell_line+mutation/predictions.json"));
}

TEST(CliTest, LiveBackendWithoutKeyFailsBeforeAnyRequest) {
  Workspace ws;
  for (const char* cmd : {"ingest", "ablate", "split"}) ASSERT_EQ(ws.run({cmd}), 0);
  {
    std::string text = slurp(ws.config());
    const auto pos = text.find("kind = \"mock\"");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 13, "kind = \"live\"");
    const std::string old_env = "api_key_env = \"LLM_API_KEY\"";
    const auto env_pos = text.find(old_env);
    ASSERT_NE(env_pos, std::string::npos);
    text.replace(env_pos, old_env.size(), "api_key_env = \"ONCOPROMPT_TEST_UNSET_KEY\"");
    std::ofstream(ws.config()) << text;
  }
  std::string err;
  EXPECT_EQ(ws.run({"predict"}, nullptr, &err), cli::kValidation);
  EXPECT_NE(err.find("ONCOPROMPT_TEST_UNSET_KEY"), std::string::npos) << err;
}

}  // namespace
}  // namespace oncoprompt
