#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "oncoprompt/types.hpp"

namespace oncoprompt {

/// Ordered (substring, label) markers; the first marker found in the prompt
/// decides, otherwise `fallback`.
struct MockRule {
  std::vector<std::pair<std::string, Label>> markers;
  Label fallback = Label::kResistant;

  Label apply(std::string_view prompt) const;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{500};
};

enum class BackendKind { kLive, kMock };

std::string_view to_string(BackendKind kind);

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  std::string endpoint_url = "https://api.openai.com/v1/completions";
  std::string model_id = "ada";
  double temperature = 0.0;
  int max_tokens = 4;
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry;
  std::string api_key_env = "LLM_API_KEY";
  MockRule mock;

  /// Throws ConfigError when temperature < 0, max_tokens < 1 or
  /// max_attempts < 1.
  void validate() const;
};

/// One raw completion per prompt. Implementations throw BackendError and
/// must tolerate concurrent calls.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(std::string_view prompt) = 0;
};

class MockBackend final : public CompletionBackend {
 public:
  /// The first `transient_failures` calls throw a retryable error.
  explicit MockBackend(MockRule rule, int transient_failures = 0)
      : rule_(std::move(rule)), failures_left_(transient_failures) {}

  std::string complete(std::string_view prompt) override;

  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  MockRule rule_;
  std::atomic<int> failures_left_;
  std::atomic<std::size_t> calls_{0};
};

/// POSTs {model, prompt, temperature, max_tokens} to a completions endpoint
/// with a bearer token and returns choices[0].text.
class LiveBackend final : public CompletionBackend {
 public:
  LiveBackend(BackendConfig config, std::string api_key);

  std::string complete(std::string_view prompt) override;

 private:
  BackendConfig config_;
  std::string api_key_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Live configs need a non-empty key in `api_key_env`; a missing key throws
/// ConfigError before anything touches the network.
std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config,
                                                const EnvLookup& env = process_env);

/// Sensitive or Resistant for the earliest whole-word occurrence of either
/// class name (case-insensitive), Unparseable when neither occurs.
Outcome normalize_response(std::string_view raw);

struct Prediction {
  Outcome outcome = Outcome::kUnparseable;
  std::string raw;
  std::string prompt_digest;         // sha256 of the prompt
  std::optional<std::string> error;  // set when the backend gave up

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Raw completions keyed by (model_id, prompt digest). With a directory,
/// entries load from and append to <dir>/cache.jsonl. Thread-safe.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& model_id, const std::string& digest) const;
  void put(const std::string& model_id, const std::string& digest, const std::string& raw);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
  std::optional<std::filesystem::path> file_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct BatchResult {
  std::vector<Prediction> predictions;  // input order
  std::vector<std::size_t> failed_indices;
  std::size_t backend_attempts = 0;
};

/// Retry, cache and fan-out around a backend.
class Gateway {
 public:
  Gateway(BackendConfig config, std::shared_ptr<CompletionBackend> backend,
          std::shared_ptr<ResponseCache> cache = std::make_shared<ResponseCache>(),
          Sleeper sleeper = {});

  /// Retries retryable failures with exponential backoff (base, 2x base,
  /// ...) up to max_attempts; then throws BackendError(kExhausted). Fatal
  /// errors propagate at once. Does not consult the cache.
  std::string complete(std::string_view prompt);

  /// Cached single prediction.
  Prediction predict(std::string_view prompt);

  /// Predictions in input order. Each distinct uncached prompt reaches the
  /// backend at most once; at most `parallelism` are in flight. Failures
  /// become per-item error markers listed in failed_indices.
  BatchResult batch_predict(const std::vector<std::string>& prompts, std::size_t parallelism);

  const BackendConfig& config() const noexcept { return config_; }
  std::size_t attempts() const noexcept { return attempts_.load(); }

 private:
  BackendConfig config_;
  std::shared_ptr<CompletionBackend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  Sleeper sleeper_;
  std::atomic<std::size_t> attempts_{0};
};

/// One completion from the backend described by `config` (mock or live).
std::string complete(const BackendConfig& config, std::string_view prompt);

BatchResult batch_predict(const BackendConfig& config, const std::vector<std::string>& prompts,
                          std::size_t parallelism, const std::shared_ptr<ResponseCache>& cache);

}  // namespace oncoprompt
