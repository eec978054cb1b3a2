#include "oncoprompt/gateway.hpp"

#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "oncoprompt/error.hpp"
#include "oncoprompt/text.hpp"

namespace oncoprompt {

Label MockRule::apply(std::string_view prompt) const {
  for (const auto& [marker, label] : markers) {
    if (prompt.find(marker) != std::string_view::npos) return label;
  }
  return fallback;
}

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::kLive ? "live" : "mock";
}

void BackendConfig::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("backend temperature must be >= 0");
  if (max_tokens < 1) throw ConfigError("backend max_tokens must be >= 1");
  if (retry.max_attempts < 1) throw ConfigError("backend retry max_attempts must be >= 1");
  if (retry.base_backoff.count() < 0) throw ConfigError("backend base_backoff must be >= 0");
  if (model_id.empty()) throw ConfigError("backend model_id must be non-empty");
}

std::string MockBackend::complete(std::string_view prompt) {
  ++calls_;
  if (failures_left_.fetch_sub(1) > 0) {
    throw BackendError(BackendError::Kind::kRetryable, "mock: injected transient failure", 503);
  }
  return std::string(to_string(rule_.apply(prompt)));
}

LiveBackend::LiveBackend(BackendConfig config, std::string api_key)
    : config_(std::move(config)), api_key_(std::move(api_key)) {
  const std::string& url = config_.endpoint_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint_url must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

std::string LiveBackend::complete(std::string_view prompt) {
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_bearer_token_auth(api_key_);

  nlohmann::ordered_json body;
  body["model"] = config_.model_id;
  body["prompt"] = std::string(prompt);
  body["temperature"] = config_.temperature;
  body["max_tokens"] = config_.max_tokens;

  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw BackendError(BackendError::Kind::kRetryable,
                       "request failed: " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw BackendError(BackendError::Kind::kFatal,
                       "authentication rejected (HTTP " + std::to_string(status) + ")", status);
  }
  if (status == 429 || status >= 500) {
    throw BackendError(BackendError::Kind::kRetryable,
                       "provider returned HTTP " + std::to_string(status), status);
  }
  if (status != 200) {
    throw BackendError(BackendError::Kind::kFatal,
                       "provider returned HTTP " + std::to_string(status), status);
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(BackendError::Kind::kFatal,
                       std::string("malformed completion response: ") + e.what(), status);
  }
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config,
                                                const EnvLookup& env) {
  config.validate();
  if (config.kind == BackendKind::kMock) {
    return std::make_unique<MockBackend>(config.mock);
  }
  auto key = env(config.api_key_env);
  if (!key || key->empty()) {
    throw ConfigError("live backend needs an API key in $" + config.api_key_env);
  }
  return std::make_unique<LiveBackend>(config, std::move(*key));
}

namespace {

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::size_t find_word(const std::string& hay, std::string_view word) {
  std::size_t pos = hay.find(word);
  while (pos != std::string::npos) {
    const bool left_ok = pos == 0 || !word_char(hay[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right_ok = end == hay.size() || !word_char(hay[end]);
    if (left_ok && right_ok) return pos;
    pos = hay.find(word, pos + 1);
  }
  return std::string::npos;
}

}  // namespace

Outcome normalize_response(std::string_view raw) {
  const std::string lowered = text::to_lower(raw);
  const auto s = find_word(lowered, "sensitive");
  const auto r = find_word(lowered, "resistant");
  if (s == std::string::npos && r == std::string::npos) return Outcome::kUnparseable;
  return s < r ? Outcome::kSensitive : Outcome::kResistant;
}

ResponseCache::ResponseCache(std::filesystem::path dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create cache directory " + dir.string() + ": " + ec.message());
  file_ = dir / "cache.jsonl";
  std::ifstream in(*file_);
  std::string line;
  while (std::getline(in, line)) {
    // A torn final line from an interrupted run is skipped.
    auto obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) continue;
    if (!obj.contains("model_id") || !obj.contains("prompt_sha256") || !obj.contains("raw")) {
      continue;
    }
    entries_[obj["model_id"].get<std::string>() + '\n' +
             obj["prompt_sha256"].get<std::string>()] = obj["raw"].get<std::string>();
  }
}

std::optional<std::string> ResponseCache::get(const std::string& model_id,
                                              const std::string& digest) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(model_id + '\n' + digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& model_id, const std::string& digest,
                        const std::string& raw) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = entries_.insert_or_assign(model_id + '\n' + digest, raw);
  if (!file_ || !inserted) return;
  nlohmann::ordered_json obj;
  obj["model_id"] = model_id;
  obj["prompt_sha256"] = digest;
  obj["raw"] = raw;
  std::ofstream out(*file_, std::ios::app | std::ios::binary);
  out << obj.dump() << '\n';
  if (!out) throw IoError("cannot append to " + file_->string());
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

Gateway::Gateway(BackendConfig config, std::shared_ptr<CompletionBackend> backend,
                 std::shared_ptr<ResponseCache> cache, Sleeper sleeper)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {
  config_.validate();
}

std::string Gateway::complete(std::string_view prompt) {
  auto backoff = config_.retry.base_backoff;
  for (int attempt = 1;; ++attempt) {
    ++attempts_;
    try {
      return backend_->complete(prompt);
    } catch (const BackendError& e) {
      if (!e.retryable()) throw;
      if (attempt >= config_.retry.max_attempts) {
        throw BackendError(BackendError::Kind::kExhausted,
                           "gave up after " + std::to_string(attempt) + " attempts: " + e.what(),
                           e.http_status());
      }
    }
    sleeper_(backoff);
    backoff *= 2;
  }
}

Prediction Gateway::predict(std::string_view prompt) {
  Prediction p;
  p.prompt_digest = text::sha256_hex(prompt);
  if (auto hit = cache_->get(config_.model_id, p.prompt_digest)) {
    p.raw = std::move(*hit);
  } else {
    p.raw = complete(prompt);
    cache_->put(config_.model_id, p.prompt_digest, p.raw);
  }
  p.outcome = normalize_response(p.raw);
  return p;
}

BatchResult Gateway::batch_predict(const std::vector<std::string>& prompts,
                                   std::size_t parallelism) {
  if (parallelism < 1) throw ContractError("parallelism must be >= 1");
  const std::size_t attempts_before = attempts_.load();

  // Distinct prompts missing from the cache, in first-seen order.
  std::vector<std::string> digests(prompts.size());
  std::unordered_map<std::string, std::size_t> job_of_digest;
  std::vector<std::size_t> jobs;  // index of the first prompt with that digest
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    digests[i] = text::sha256_hex(prompts[i]);
    if (job_of_digest.count(digests[i])) continue;
    if (cache_->get(config_.model_id, digests[i])) continue;
    job_of_digest.emplace(digests[i], jobs.size());
    jobs.push_back(i);
  }

  std::vector<std::optional<std::string>> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const std::size_t i = jobs[j];
      try {
        cache_->put(config_.model_id, digests[i], complete(prompts[i]));
      } catch (const Error& e) {
        errors[j] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::min(parallelism, jobs.size());
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  BatchResult result;
  result.predictions.reserve(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    Prediction p;
    p.prompt_digest = digests[i];
    auto job = job_of_digest.find(digests[i]);
    if (job != job_of_digest.end() && errors[job->second]) {
      p.error = errors[job->second];
      result.failed_indices.push_back(i);
    } else {
      p.raw = cache_->get(config_.model_id, digests[i]).value_or("");
      p.outcome = normalize_response(p.raw);
    }
    result.predictions.push_back(std::move(p));
  }
  result.backend_attempts = attempts_.load() - attempts_before;
  return result;
}

std::string complete(const BackendConfig& config, std::string_view prompt) {
  Gateway gw(config, make_backend(config));
  return gw.complete(prompt);
}

BatchResult batch_predict(const BackendConfig& config, const std::vector<std::string>& prompts,
                          std::size_t parallelism, const std::shared_ptr<ResponseCache>& cache) {
  Gateway gw(config, make_backend(config), cache);
  return gw.batch_predict(prompts, parallelism);
}

}  // namespace oncoprompt
