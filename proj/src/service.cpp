#include "oncoprompt/service.hpp"

#include <httplib.h>

#include <chrono>
#include <json.hpp>

#include "oncoprompt/error.hpp"
#include "oncoprompt/prompt.hpp"
#include "oncoprompt/text.hpp"

namespace oncoprompt {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

HttpReply json_reply(int status, const ordered_json& body) {
  return {status, body.dump(), {}};
}

HttpReply error_reply(int status, const std::string& message, const std::string& field = {}) {
  ordered_json body;
  body["error"] = message;
  if (!field.empty()) body["field"] = field;
  return json_reply(status, body);
}

// Thrown while decoding a request; becomes a 400.
struct BadRequest {
  std::string message;
  std::string field;
};

std::optional<std::string> optional_text(const json& req, const char* key) {
  if (!req.contains(key) || req[key].is_null()) return std::nullopt;
  if (!req[key].is_string()) throw BadRequest{std::string("'") + key + "' must be a string", key};
  std::string v(text::trim(req[key].get<std::string>()));
  if (v.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> string_list(const json& value, const char* key) {
  if (value.is_string()) return text::split(value.get<std::string>(), ',');
  if (!value.is_array()) {
    throw BadRequest{std::string("'") + key + "' must be an array of strings", key};
  }
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw BadRequest{std::string("'") + key + "' must be an array of strings", key};
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

PredictionService::PredictionService(ServiceConfig service, SerializationOrder order,
                                     BackendConfig backend, std::shared_ptr<Gateway> gateway,
                                     std::string backend_error, LogSink log)
    : service_(std::move(service)),
      order_(std::move(order)),
      backend_(std::move(backend)),
      gateway_(std::move(gateway)),
      backend_error_(std::move(backend_error)),
      log_(std::move(log)) {}

void PredictionService::log(std::string_view line) const {
  if (log_) log_(line);
}

HttpReply PredictionService::handle_predict(std::string_view body) const {
  const auto started = std::chrono::steady_clock::now();
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error&) {
    log("predict 400 malformed body");
    return error_reply(400, "request body is not valid JSON");
  }
  if (!req.is_object()) return error_reply(400, "request body must be a JSON object");

  PairRecord record;
  std::vector<Feature> provided{Feature::kDrug};
  std::optional<FeatureSet> requested;
  try {
    auto drug = optional_text(req, "drug");
    if (!drug) throw BadRequest{"'drug' is required and must be non-empty", "drug"};
    record.drug_name = text::to_lower(*drug);
    if (auto v = optional_text(req, "target")) {
      record.drug_target = text::to_lower(*v);
      provided.push_back(Feature::kTarget);
    }
    if (auto v = optional_text(req, "cell_line")) {
      record.cell_line = text::to_lower(*v);
      provided.push_back(Feature::kCellLine);
    }
    // SMILES is case-sensitive (lowercase marks aromatic atoms).
    if (auto v = optional_text(req, "smiles")) {
      record.smiles = *v;
      provided.push_back(Feature::kSmiles);
    }
    if (req.contains("mutations") && !req["mutations"].is_null()) {
      auto genes = normalize_genes(string_list(req["mutations"], "mutations"));
      if (!genes.empty()) {
        record.mutations = std::move(genes);
        provided.push_back(Feature::kMutation);
      }
    }
    if (req.contains("feature_set") && !req["feature_set"].is_null()) {
      try {
        requested = FeatureSet::parse(text::join(string_list(req["feature_set"], "feature_set"), ","));
      } catch (const ValidationError& e) {
        throw BadRequest{e.what(), "feature_set"};
      }
    }
  } catch (const BadRequest& bad) {
    log("predict 400 field=" + bad.field);
    return error_reply(400, bad.message, bad.field);
  }

  std::vector<Feature> included;
  if (requested) {
    included = requested->features();
  } else {
    for (Feature f : provided) {
      if (service_.features.contains(f)) included.push_back(f);
    }
  }
  ZeroShotPrompt prompt;
  try {
    prompt = serialize_zero_shot(record, FeatureSet::from_features(included), order_);
  } catch (const SerializationError& e) {
    log("predict 400 field=" + e.field());
    return error_reply(400, e.what(), e.field());
  }

  if (!gateway_) {
    log("predict 503 backend unavailable");
    return error_reply(503, "backend unavailable: " + backend_error_);
  }
  Prediction p;
  try {
    p = gateway_->predict(prompt.full_text);
  } catch (const BackendError& e) {
    log("predict 502 backend error");
    HttpReply reply = error_reply(502, std::string("backend failed: ") + e.what());
    if (e.kind() == BackendError::Kind::kExhausted) reply.headers.emplace_back("Retry-After", "30");
    return reply;
  }

  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  ordered_json out;
  out["label"] = to_string(p.outcome);
  out["raw"] = p.raw;
  out["prompt"] = prompt.full_text;
  out["model_id"] = backend_.model_id;
  out["latency_ms"] = elapsed.count();
  log("predict 200 label=" + std::string(to_string(p.outcome)) +
      " latency_ms=" + std::to_string(elapsed.count()));
  return json_reply(200, out);
}

HttpReply PredictionService::handle_health() const {
  ordered_json out;
  out["status"] = "ok";
  out["version"] = kVersion;
  out["backend"] = to_string(backend_.kind);
  out["backend_ready"] = gateway_ != nullptr;
  return json_reply(200, out);
}

HttpReply PredictionService::handle_config() const {
  ordered_json out;
  out["model_id"] = backend_.model_id;
  out["backend"] = to_string(backend_.kind);
  out["temperature"] = backend_.temperature;
  out["max_tokens"] = backend_.max_tokens;
  out["feature_set"] = text::split(service_.features.csv(), ',');
  out["serialization_order"] = text::split(order_.csv(), ',');
  return json_reply(200, out);
}

void PredictionService::mount(httplib::Server& server) const {
  const std::string origin = service_.cors_origin;
  auto send = [origin](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    for (const auto& [k, v] : reply.headers) res.set_header(k, v);
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_content(reply.body, "application/json");
  };
  server.Post("/api/v1/predict", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_predict(req.body));
  });
  auto health = [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_health());
  };
  server.Get("/api/v1/health", health);
  server.Get("/health", health);
  server.Get("/api/v1/config", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_config());
  });
  server.Options(R"(/api/v1/.*)", [origin](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
}

PredictionService make_service(const RunConfig& config, const EnvLookup& env, LogSink log) {
  std::shared_ptr<Gateway> gateway;
  std::string error;
  try {
    std::shared_ptr<ResponseCache> cache =
        config.cache_dir ? std::make_shared<ResponseCache>(*config.cache_dir)
                         : std::make_shared<ResponseCache>();
    gateway = std::make_shared<Gateway>(config.backend, make_backend(config.backend, env), cache);
  } catch (const ConfigError& e) {
    error = e.what();
  }
  return PredictionService(config.service, config.order, config.backend, std::move(gateway),
                           std::move(error), std::move(log));
}

bool serve(const PredictionService& service, const std::string& host, int port) {
  httplib::Server server;
  service.mount(server);
  return server.listen(host, port);
}

}  // namespace oncoprompt
