#pragma once

#include "ccpca/service.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace ccpca {

inline constexpr std::string_view kVersion = "0.1.0";

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8765;                    // 0 picks a free port
  std::filesystem::path dataset_dir;  // bundles that POST /sessions may reference by name
  /// How long an event stream waits for a change before sending a keep-alive comment.
  std::chrono::milliseconds event_poll{15000};
};

/// JSON-over-HTTP front end of a SessionStore.
///
///   GET  /health                                  {status, version}
///   POST /sessions                                bundle, or {dataset|bundle, params}
///   GET  /sessions/{id}                           session description
///   POST /sessions/{id}/clustering                {eps, min_pts}
///   POST /sessions/{id}/clusters                  {points: [...]}
///   POST /sessions/{id}/params                    analysis knobs
///   GET  /sessions/{id}/heatmap
///   GET  /sessions/{id}/histogram?feature=&cluster=
///   GET  /sessions/{id}/clusters/{cid}/summary
///   GET  /sessions/{id}/events                    text/event-stream of {"revision": n}
///
/// Errors are {"error": message} with 400 (bad input), 404 (unknown session) or
/// 422 (numerical failure).
class HttpServer {
 public:
  /// Throws InputError when dataset_dir is set but is not a directory.
  explicit HttpServer(ServerConfig config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the listening socket and returns the port. Throws InputError on failure.
  int bind();
  /// Serves until stop() is called. bind() must have succeeded.
  void run();
  void stop();

  SessionStore& store() { return store_; }

 private:
  struct Impl;
  ServerConfig config_;
  SessionStore store_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ccpca
