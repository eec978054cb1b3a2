#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oncoprompt/config.hpp"
#include "oncoprompt/gateway.hpp"

namespace httplib {
class Server;
}

namespace oncoprompt {

inline constexpr std::string_view kVersion = "0.1.0";

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
  std::vector<std::pair<std::string, std::string>> headers;
};

using LogSink = std::function<void(std::string_view)>;

/// Single-pair prediction over the configured backend. Holds no per-request
/// state; the gateway cache is shared between requests.
class PredictionService {
 public:
  /// `gateway` may be null when the backend could not be built (e.g. a live
  /// backend without a key); `backend_error` then explains why and predict
  /// answers 503 while health and config keep working.
  PredictionService(ServiceConfig service, SerializationOrder order, BackendConfig backend,
                    std::shared_ptr<Gateway> gateway, std::string backend_error = {},
                    LogSink log = {});

  /// POST /api/v1/predict. 400 on malformed JSON or a missing/empty drug,
  /// 502 with Retry-After when the backend gives up.
  HttpReply handle_predict(std::string_view body) const;
  /// GET /api/v1/health. Never touches the backend.
  HttpReply handle_health() const;
  /// GET /api/v1/config, without secrets.
  HttpReply handle_config() const;

  /// Registers the routes, CORS headers and preflight handling.
  void mount(httplib::Server& server) const;

 private:
  void log(std::string_view line) const;

  ServiceConfig service_;
  SerializationOrder order_;
  BackendConfig backend_;
  std::shared_ptr<Gateway> gateway_;
  std::string backend_error_;
  LogSink log_;
};

/// Builds the backend from `config` (reading the key through `env`).
PredictionService make_service(const RunConfig& config, const EnvLookup& env = process_env,
                               LogSink log = {});

/// Blocks serving on host:port until the server is stopped.
bool serve(const PredictionService& service, const std::string& host, int port);

}  // namespace oncoprompt
