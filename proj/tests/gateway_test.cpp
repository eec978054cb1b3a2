#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "oncoprompt/error.hpp"
#include "oncoprompt/gateway.hpp"
#include "oncoprompt/text.hpp"

namespace oncoprompt {
namespace {

namespace fs = std::filesystem;

TEST(NormalizeTest, EarliestWholeWordWins) {
  EXPECT_EQ(normalize_response(" Sensitive."), Outcome::kSensitive);
  EXPECT_EQ(normalize_response("RESISTANT"), Outcome::kResistant);
  EXPECT_EQ(normalize_response("resistant, not sensitive"), Outcome::kResistant);
  EXPECT_EQ(normalize_response("\nsensitive\n"), Outcome::kSensitive);
  EXPECT_EQ(normalize_response("The answer: sensitive or resistant"), Outcome::kSensitive);
  EXPECT_EQ(normalize_response("maybe"), Outcome::kUnparseable);
  EXPECT_EQ(normalize_response(""), Outcome::kUnparseable);
  EXPECT_EQ(normalize_response("insensitive"), Outcome::kUnparseable);
  EXPECT_EQ(normalize_response("sensitive_ness"), Outcome::kUnparseable);
  EXPECT_EQ(normalize_response("hypersensitive; resistant"), Outcome::kResistant);
}

TEST(MockRuleTest, FirstMarkerThenFallback) {
  MockRule rule;
  rule.markers = {{"crebbp", Label::kSensitive}, {"tp53", Label::kResistant}};
  rule.fallback = Label::kResistant;
  EXPECT_EQ(rule.apply("gene mutation: crebbp, tp53"), Label::kSensitive);
  EXPECT_EQ(rule.apply("gene mutation: tp53"), Label::kResistant);
  EXPECT_EQ(rule.apply("nothing here"), Label::kResistant);
  MockBackend backend(rule);
  EXPECT_EQ(backend.complete("crebbp"), "sensitive");
  EXPECT_EQ(backend.complete("nothing"), "resistant");
  EXPECT_EQ(backend.calls(), 2u);
}

TEST(BackendFactoryTest, LiveWithoutKeyIsAConfigError) {
  BackendConfig cfg;
  cfg.kind = BackendKind::kLive;
  const EnvLookup none = [](const std::string&) { return std::optional<std::string>{}; };
  EXPECT_THROW(make_backend(cfg, none), ConfigError);
  const EnvLookup empty = [](const std::string&) { return std::optional<std::string>{""}; };
  EXPECT_THROW(make_backend(cfg, empty), ConfigError);
  const EnvLookup present = [](const std::string&) { return std::optional<std::string>{"k"}; };
  EXPECT_NE(make_backend(cfg, present), nullptr);
  cfg.kind = BackendKind::kMock;
  EXPECT_NE(make_backend(cfg, none), nullptr);
}

TEST(BackendConfigTest, Validation) {
  BackendConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.temperature = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_tokens = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.retry.max_attempts = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

struct SleepLog {
  std::mutex mu;
  std::vector<std::chrono::milliseconds> waits;
  Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) {
      std::lock_guard lock(mu);
      waits.push_back(d);
    };
  }
};

BackendConfig mock_config(int attempts = 3) {
  BackendConfig cfg;
  cfg.retry.max_attempts = attempts;
  cfg.retry.base_backoff = std::chrono::milliseconds(100);
  cfg.mock.markers = {{"crebbp", Label::kSensitive}};
  cfg.mock.fallback = Label::kResistant;
  return cfg;
}

TEST(GatewayRetryTest, TwoTransientFailuresThenSuccess) {
  const auto cfg = mock_config(3);
  auto backend = std::make_shared<MockBackend>(cfg.mock, 2);
  SleepLog sleeps;
  Gateway gw(cfg, backend, std::make_shared<ResponseCache>(), sleeps.sleeper());
  EXPECT_EQ(gw.complete("crebbp"), "sensitive");
  EXPECT_EQ(backend->calls(), 3u);
  EXPECT_EQ(gw.attempts(), 3u);
  ASSERT_EQ(sleeps.waits.size(), 2u);
  EXPECT_EQ(sleeps.waits[0].count(), 100);
  EXPECT_EQ(sleeps.waits[1].count(), 200);
}

TEST(GatewayRetryTest, ExhaustionRaisesAfterMaxAttempts) {
  const auto cfg = mock_config(3);
  auto backend = std::make_shared<MockBackend>(cfg.mock, 5);
  SleepLog sleeps;
  Gateway gw(cfg, backend, std::make_shared<ResponseCache>(), sleeps.sleeper());
  try {
    gw.complete("x");
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kExhausted);
  }
  EXPECT_EQ(backend->calls(), 3u);
}

class FatalBackend final : public CompletionBackend {
 public:
  std::atomic<int> calls{0};
  std::string complete(std::string_view) override {
    ++calls;
    throw BackendError(BackendError::Kind::kFatal, "denied", 401);
  }
};

TEST(GatewayRetryTest, FatalErrorsAreNotRetried) {
  auto backend = std::make_shared<FatalBackend>();
  SleepLog sleeps;
  Gateway gw(mock_config(5), backend, std::make_shared<ResponseCache>(), sleeps.sleeper());
  EXPECT_THROW(gw.complete("x"), BackendError);
  EXPECT_EQ(backend->calls.load(), 1);
  EXPECT_TRUE(sleeps.waits.empty());
}

TEST(GatewayCacheTest, RepeatPredictHitsCache) {
  const auto cfg = mock_config();
  auto backend = std::make_shared<MockBackend>(cfg.mock);
  Gateway gw(cfg, backend);
  const auto a = gw.predict("crebbp");
  const auto b = gw.predict("crebbp");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.outcome, Outcome::kSensitive);
  EXPECT_EQ(a.prompt_digest, text::sha256_hex("crebbp"));
  EXPECT_EQ(backend->calls(), 1u);
}

TEST(GatewayCacheTest, CacheIsKeyedByModel) {
  auto cache = std::make_shared<ResponseCache>();
  auto cfg = mock_config();
  auto backend = std::make_shared<MockBackend>(cfg.mock);
  Gateway(cfg, backend, cache).predict("p");
  cfg.model_id = "babbage";
  Gateway(cfg, backend, cache).predict("p");
  EXPECT_EQ(backend->calls(), 2u);
  EXPECT_EQ(cache->size(), 2u);
}

TEST(GatewayCacheTest, PersistsAcrossInstances) {
  const fs::path dir = fs::temp_directory_path() / "oncoprompt_cache_test";
  fs::remove_all(dir);
  const auto cfg = mock_config();
  {
    auto backend = std::make_shared<MockBackend>(cfg.mock);
    Gateway gw(cfg, backend, std::make_shared<ResponseCache>(dir));
    gw.batch_predict({"a", "crebbp", "c"}, 2);
    EXPECT_EQ(backend->calls(), 3u);
  }
  auto backend = std::make_shared<MockBackend>(cfg.mock);
  Gateway gw(cfg, backend, std::make_shared<ResponseCache>(dir));
  const auto result = gw.batch_predict({"crebbp", "a", "c"}, 2);
  EXPECT_EQ(backend->calls(), 0u);
  EXPECT_EQ(result.predictions[0].outcome, Outcome::kSensitive);
  fs::remove_all(dir);
}

TEST(GatewayCacheTest, MalformedCacheLinesAreSkipped) {
  const fs::path dir = fs::temp_directory_path() / "oncoprompt_cache_bad";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "cache.jsonl");
    out << "garbage\n{\"model_id\":\"ada\",\"prompt_sha256\":\"" << text::sha256_hex("q")
        << "\",\"raw\":\" sensitive\"}\n";
  }
  ResponseCache cache(dir);
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_EQ(cache.get("ada", text::sha256_hex("q")), " sensitive");
  fs::remove_all(dir);
}

std::vector<std::string> random_prompts(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  const std::vector<std::string> genes{"crebbp", "tp53", "kras", "egfr", "none"};
  std::vector<std::string> prompts;
  for (std::size_t i = 0; i < n; ++i) {
    prompts.push_back("drug: d" + std::to_string(rng() % 7) + "\ngene mutation: " +
                      genes[rng() % genes.size()]);
  }
  return prompts;
}

TEST(GatewayBatchTest, MatchesSequentialOracle) {
  const auto cfg = mock_config();
  const auto prompts = random_prompts(20, 11);
  auto backend = std::make_shared<MockBackend>(cfg.mock);
  Gateway gw(cfg, backend);
  const auto result = gw.batch_predict(prompts, 4);
  ASSERT_EQ(result.predictions.size(), prompts.size());
  EXPECT_TRUE(result.failed_indices.empty());
  std::set<std::string> distinct(prompts.begin(), prompts.end());
  EXPECT_EQ(backend->calls(), distinct.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const bool s = prompts[i].find("crebbp") != std::string::npos;
    EXPECT_EQ(result.predictions[i].outcome, s ? Outcome::kSensitive : Outcome::kResistant) << i;
    EXPECT_EQ(result.predictions[i].prompt_digest, text::sha256_hex(prompts[i]));
  }
}

TEST(GatewayBatchTest, ParallelismDoesNotChangeResults) {
  const auto cfg = mock_config();
  const auto prompts = random_prompts(200, 3);
  Gateway one(cfg, std::make_shared<MockBackend>(cfg.mock));
  Gateway four(cfg, std::make_shared<MockBackend>(cfg.mock));
  Gateway many(cfg, std::make_shared<MockBackend>(cfg.mock));
  const auto a = one.batch_predict(prompts, 1);
  EXPECT_EQ(a.predictions, four.batch_predict(prompts, 4).predictions);
  EXPECT_EQ(a.predictions, many.batch_predict(prompts, 64).predictions);
}

// Fails every attempt for prompts containing "boom".
class SelectiveBackend final : public CompletionBackend {
 public:
  std::string complete(std::string_view prompt) override {
    if (prompt.find("boom") != std::string_view::npos) {
      throw BackendError(BackendError::Kind::kRetryable, "unavailable", 503);
    }
    return " resistant";
  }
};

TEST(GatewayBatchTest, FailuresBecomePerItemMarkers) {
  SleepLog sleeps;
  Gateway gw(mock_config(2), std::make_shared<SelectiveBackend>(),
             std::make_shared<ResponseCache>(), sleeps.sleeper());
  const auto result = gw.batch_predict({"ok", "boom", "ok2", "boom"}, 3);
  EXPECT_EQ(result.failed_indices, (std::vector<std::size_t>{1, 3}));
  EXPECT_TRUE(result.predictions[1].error.has_value());
  EXPECT_FALSE(result.predictions[0].error.has_value());
  EXPECT_EQ(result.predictions[2].outcome, Outcome::kResistant);
}

TEST(GatewayBatchTest, EmptyInput) {
  const auto cfg = mock_config();
  Gateway gw(cfg, std::make_shared<MockBackend>(cfg.mock));
  EXPECT_TRUE(gw.batch_predict({}, 4).predictions.empty());
}

// Local stand-in for a completions endpoint.
class FakeProvider {
 public:
  FakeProvider() {
    server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      bodies_.push_back(req.body);
      auth_.push_back(req.get_header_value("Authorization"));
      if (!statuses_.empty()) {
        const int status = statuses_.front();
        statuses_.erase(statuses_.begin());
        res.status = status;
        res.set_content("{\"error\":\"nope\"}", "application/json");
        return;
      }
      res.set_content(R"({"choices":[{"text":" Sensitive"}]})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeProvider() {
    server_.stop();
    thread_.join();
  }
  void fail_with(std::vector<int> statuses) { statuses_ = std::move(statuses); }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/completions"; }
  std::vector<std::string> bodies() {
    std::lock_guard lock(mu_);
    return bodies_;
  }
  std::vector<std::string> auth() {
    std::lock_guard lock(mu_);
    return auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<int> statuses_;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
};

BackendConfig live_config(const std::string& url) {
  BackendConfig cfg;
  cfg.kind = BackendKind::kLive;
  cfg.endpoint_url = url;
  cfg.model_id = "ada";
  cfg.timeout = std::chrono::milliseconds(5000);
  cfg.retry.base_backoff = std::chrono::milliseconds(1);
  return cfg;
}

TEST(LiveBackendTest, SendsTheDocumentedRequest) {
  FakeProvider provider;
  const auto cfg = live_config(provider.url());
  LiveBackend backend(cfg, "sk-test-123");
  EXPECT_EQ(backend.complete("drug: x"), " Sensitive");
  const auto bodies = provider.bodies();
  ASSERT_EQ(bodies.size(), 1u);
  const auto body = nlohmann::json::parse(bodies[0]);
  EXPECT_EQ(body["model"], "ada");
  EXPECT_EQ(body["prompt"], "drug: x");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["max_tokens"], 4);
  EXPECT_EQ(provider.auth()[0], "Bearer sk-test-123");
}

TEST(LiveBackendTest, RateLimitIsRetriedThroughTheGateway) {
  FakeProvider provider;
  provider.fail_with({429, 503});
  const auto cfg = live_config(provider.url());
  SleepLog sleeps;
  Gateway gw(cfg, std::make_shared<LiveBackend>(cfg, "k"), std::make_shared<ResponseCache>(),
             sleeps.sleeper());
  EXPECT_EQ(gw.predict("drug: x").outcome, Outcome::kSensitive);
  EXPECT_EQ(provider.bodies().size(), 3u);
}

TEST(LiveBackendTest, AuthFailureIsFatal) {
  FakeProvider provider;
  provider.fail_with({401, 401, 401});
  const auto cfg = live_config(provider.url());
  Gateway gw(cfg, std::make_shared<LiveBackend>(cfg, "k"), std::make_shared<ResponseCache>(),
             [](std::chrono::milliseconds) {});
  try {
    gw.complete("x");
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kFatal);
    EXPECT_EQ(std::string(e.what()).find("k\""), std::string::npos);
  }
  EXPECT_EQ(provider.bodies().size(), 1u);
}

TEST(LiveBackendTest, UnreachableEndpointIsRetryable) {
  auto cfg = live_config("http://127.0.0.1:1/v1/completions");
  cfg.timeout = std::chrono::milliseconds(500);
  LiveBackend backend(cfg, "k");
  try {
    backend.complete("x");
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kRetryable);
  }
}

}  // namespace
}  // namespace oncoprompt
