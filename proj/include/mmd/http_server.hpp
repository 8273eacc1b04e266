#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "mmd/engine.hpp"

namespace mmd {

/// HTTP status used for an error of the given kind.
int http_status_for(ErrorKind kind);

/**
 * JSON API over an Engine:
 *   POST /api/session                  {"mode"}            -> {"session_id", "mode"}
 *   POST /api/session/{id}/query       {"tokens": [...]}   -> round
 *   POST /api/session/{id}/click       {"product_id"}      -> round
 *   GET  /api/session/{id}/history                         -> {"session_id", "mode", "rounds"}
 *   GET  /api/product/{id}/image.svg                       -> image/svg+xml
 *   GET  /api/vocab                                        -> vocabulary
 * Errors are {"error", "message"} with a 4xx/5xx status. Static files from
 * `ui_dir` are served at /, or a minimal page when no directory is given.
 */
class HttpService {
 public:
  HttpService(Engine& engine, std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds and blocks until stop(). Returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mmd
