#include "ccpca/http_server.hpp"

#include <httplib.h>

#include <atomic>

namespace ccpca {

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, Json{{"error", message}}, status);
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed JSON body: ") + e.what());
  }
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const UnknownSession& e) {
      send_error(res, 404, e.what());
    } catch (const InputError& e) {
      send_error(res, 400, e.what());
    } catch (const NumericalError& e) {
      send_error(res, 422, e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

EmbeddedDataset load_named(const std::filesystem::path& dir, const std::string& name) {
  if (dir.empty()) throw InputError("server has no dataset directory");
  const std::filesystem::path rel(name);
  if (rel.empty() || rel.is_absolute() || rel.has_parent_path()) {
    throw InputError("dataset must be a plain file name inside the dataset directory");
  }
  const auto path = dir / rel;
  if (!std::filesystem::is_regular_file(path)) throw InputError("unknown dataset '" + name + "'");
  const auto ext = path.extension().string();
  if (ext == ".csv" || ext == ".tsv") {
    EmbeddedDataset ds;
    ds.table = load_table(path, TableFormat::csv);
    return ds;
  }
  return load_bundle(path);
}

std::string_view required_param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) throw InputError(std::string("missing query parameter '") + key + "'");
  return req.get_param_value(key);
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
  std::atomic<bool> stopping{false};
  bool bound = false;
};

HttpServer::HttpServer(ServerConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  if (!config_.dataset_dir.empty() && !std::filesystem::is_directory(config_.dataset_dir)) {
    throw InputError("dataset directory does not exist: " + config_.dataset_dir.string());
  }
  auto& srv = impl_->server;
  auto& store = store_;
  const auto dataset_dir = config_.dataset_dir;

  srv.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
    send_json(res, Json{{"status", "ok"}, {"version", std::string(kVersion)}});
  }));

  srv.Post("/sessions", guarded([&store, dataset_dir](const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_body(req);
    AnalysisOptions options;
    EmbeddedDataset dataset;
    if (body.contains("features")) {
      dataset = parse_bundle(body);
    } else if (body.contains("bundle")) {
      dataset = parse_bundle(body.at("bundle"));
    } else if (body.contains("dataset")) {
      dataset = load_named(dataset_dir, body.at("dataset").get<std::string>());
    } else {
      throw InputError("POST /sessions needs a bundle or a dataset name");
    }
    if (body.contains("params")) apply_params(options, body.at("params"));
    const auto id = store.open_session(std::move(dataset), std::move(options));
    send_json(res, store.describe(id), 201);
  }));

  srv.Get(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, store.describe(req.matches[1]));
  }));

  srv.Post(R"(/sessions/([^/]+)/clustering)",
           guarded([&store](const httplib::Request& req, httplib::Response& res) {
             const Json body = parse_body(req);
             ClusterParams params;
             if (!body.contains("eps") || !body.contains("min_pts")) {
               throw InputError("clustering needs eps and min_pts");
             }
             params.eps = body.at("eps").get<double>();
             params.min_pts = body.at("min_pts").get<int>();
             send_json(res, store.run_clustering(req.matches[1], params));
           }));

  srv.Post(R"(/sessions/([^/]+)/clusters)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_body(req);
    if (!body.contains("points")) throw InputError("add cluster needs 'points'");
    send_json(res, store.add_cluster(req.matches[1], body.at("points").get<std::vector<Eigen::Index>>()));
  }));

  srv.Post(R"(/sessions/([^/]+)/params)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, store.update_params(req.matches[1], parse_body(req)));
  }));

  srv.Get(R"(/sessions/([^/]+)/heatmap)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, store.heatmap(req.matches[1]));
  }));

  srv.Get(R"(/sessions/([^/]+)/histogram)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    const std::string feature(required_param(req, "feature"));
    const std::string cluster(required_param(req, "cluster"));
    send_json(res, store.histogram(req.matches[1], feature, cluster));
  }));

  srv.Get(R"(/sessions/([^/]+)/clusters/([^/]+)/summary)",
          guarded([&store](const httplib::Request& req, httplib::Response& res) {
            send_json(res, store.cluster_summary(req.matches[1], req.matches[2]));
          }));

  auto* impl = impl_.get();
  const auto poll = config_.event_poll;
  srv.Get(R"(/sessions/([^/]+)/events)",
          guarded([&store, impl, poll](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            store.revision(id);  // 404 before the stream starts
            auto last = std::make_shared<long>(-1);
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream", [&store, impl, poll, id, last](std::size_t, httplib::DataSink& sink) {
                  if (impl->stopping) return false;
                  long rev = 0;
                  try {
                    rev = *last < 0 ? store.revision(id) : store.wait_for_change(id, *last, poll);
                  } catch (const std::exception&) {
                    return false;
                  }
                  if (impl->stopping) return false;
                  std::string chunk;
                  if (rev != *last) {
                    *last = rev;
                    chunk = "data: " + Json{{"revision", rev}}.dump() + "\n\n";
                  } else {
                    chunk = ": keep-alive\n\n";
                  }
                  return sink.write(chunk.data(), chunk.size());
                });
          }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& srv = impl_->server;
  int port = config_.port;
  if (port == 0) {
    port = srv.bind_to_any_port(config_.host);
    if (port < 0) throw InputError("cannot bind " + config_.host);
  } else if (!srv.bind_to_port(config_.host, port)) {
    throw InputError("cannot bind " + config_.host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return port;
}

void HttpServer::run() {
  if (!impl_->bound) throw InputError("server is not bound");
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  store_.shutdown();
  impl_->server.stop();
}

}  // namespace ccpca
