#include "mmd/http_server.hpp"

#include <httplib.h>

#include <iostream>

#include "mmd/error.hpp"
#include "mmd/svg.hpp"

namespace mmd {

namespace {

constexpr const char* kJson = "application/json";

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>catalog browser</title></head>
<body>
<p>The browsing API is running. Start the server with --ui-dir to serve the web client.</p>
<p>Endpoints: POST /api/session, POST /api/session/{id}/query, POST /api/session/{id}/click,
GET /api/session/{id}/history, GET /api/product/{id}/image.svg, GET /api/vocab.</p>
</body></html>
)";

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  send_json(res, {{"error", to_string(kind)}, {"message", message}}, http_status_for(kind));
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) fail(ErrorKind::Parse, "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed JSON body: ") + e.what());
  }
}

template <typename F>
httplib::Server::Handler guarded(F&& f) {
  return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.kind(), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, ErrorKind::InvalidInput, e.what());
    } catch (const std::exception& e) {
      send_json(res, {{"error", "internal"}, {"message", e.what()}}, 500);
    }
  };
}

}  // namespace

int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::DegenerateInput:
    case ErrorKind::Parse:
    case ErrorKind::Shape:
    case ErrorKind::UnknownToken:
    case ErrorKind::Protocol:
      return 400;
    case ErrorKind::NotFound:
      return 404;
    case ErrorKind::Conflict:
      return 409;
    default:
      return 500;
  }
}

struct HttpService::Impl {
  Engine& engine;
  httplib::Server server;

  explicit Impl(Engine& e) : engine(e) {}

  void install(const std::optional<std::filesystem::path>& ui_dir) {
    server.Post("/api/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      const auto mode = responder_mode_from_string(body.value("mode", std::string("rules")));
      const auto id = engine.create_session(mode);
      send_json(res, {{"session_id", id}, {"mode", to_string(mode)}, {"rounds", nlohmann::json::array()}},
                201);
    }));

    server.Post(R"(/api/session/([^/]+)/query)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  if (!body.contains("tokens") || !body["tokens"].is_array()) {
                    fail(ErrorKind::InvalidInput, "body needs a \"tokens\" array");
                  }
                  const auto tokens = body["tokens"].get<std::vector<std::string>>();
                  const auto round = engine.post_text_query(req.matches[1], tokens);
                  send_json(res, round_to_api_json(round, round.query.round));
                }));

    server.Post(R"(/api/session/([^/]+)/click)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  if (!body.contains("product_id") || !body["product_id"].is_string()) {
                    fail(ErrorKind::InvalidInput, "body needs a \"product_id\" string");
                  }
                  const auto round = engine.post_click(req.matches[1], body["product_id"]);
                  send_json(res, round_to_api_json(round, round.query.round));
                }));

    server.Get(R"(/api/session/([^/]+)/history)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 const auto rounds = engine.history(id);
                 nlohmann::json list = nlohmann::json::array();
                 for (std::size_t i = 0; i < rounds.size(); ++i) {
                   list.push_back(round_to_api_json(rounds[i], i));
                 }
                 send_json(res, {{"session_id", id},
                                 {"mode", to_string(engine.mode_of(id))},
                                 {"rounds", list}});
               }));

    server.Get(R"(/api/product/([^/]+)/image\.svg)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto& product = engine.state().catalog().at(req.matches[1]);
                 res.set_header("Cache-Control", "public, max-age=86400");
                 res.set_content(render_product_svg(product), "image/svg+xml");
               }));

    server.Get("/api/vocab", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto& vocab = engine.state().vocab();
      nlohmann::json j = vocab.to_json();
      j["tokens"] = vocab.all_tokens();
      send_json(res, j);
    }));

    bool mounted = false;
    if (ui_dir) {
      mounted = server.set_mount_point("/", ui_dir->string());
      if (!mounted) std::clog << "warning: cannot serve UI from " << ui_dir->string() << '\n';
    }
    if (!mounted) {
      server.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kPlaceholderPage, "text/html");
      });
    }
  }
};

HttpService::HttpService(Engine& engine, std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>(engine)) {
  impl_->install(ui_dir);
}

HttpService::~HttpService() = default;

bool HttpService::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpService::bind_to_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpService::stop() { impl_->server.stop(); }

}  // namespace mmd
