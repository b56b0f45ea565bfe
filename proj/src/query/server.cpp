#include "skg/query/server.hpp"

#include <httplib.h>

#include <spdlog/spdlog.h>

#include "skg/core/error.hpp"

namespace skg::query {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadRequest:
    case ErrorCode::SyntaxError:
    case ErrorCode::UnboundVariable:
    case ErrorCode::ValidationError: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::EmptyGraph: return 409;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e, std::string_view source = {}) {
  json body = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (e.offset()) {
    auto lc = line_col(source, *e.offset());
    body["position"] = {{"offset", *e.offset()}, {"line", lc.line}, {"column", lc.column}};
  }
  send_json(res, status_for(e.code()), body);
}

std::optional<std::size_t> size_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  const std::string v = req.get_param_value(name);
  if (v.empty() || v.size() > 12 || v.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::BadRequest, std::string("parameter '") + name + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(std::stoull(v));
}

/// Runs `fn` and turns library errors into JSON error responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn, std::string_view source = {}) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, e, source);
  } catch (const std::exception& e) {
    send_json(res, 500, {{"code", "InternalError"}, {"message", e.what()}});
  }
}

}  // namespace

ApiServer::ApiServer(std::shared_ptr<const QueryEngine> engine)
    : server_(std::make_unique<httplib::Server>()), engine_(std::move(engine)) {
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::set_engine(std::shared_ptr<const QueryEngine> engine) {
  std::lock_guard lock(mu_);
  engine_ = std::move(engine);
}

std::shared_ptr<const QueryEngine> ApiServer::engine() const {
  std::lock_guard lock(mu_);
  return engine_;
}

void ApiServer::mount_static(const std::filesystem::path& dir) { server_->set_mount_point("/ui", dir.string()); }

void ApiServer::install_routes() {
  auto& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                         {"Access-Control-Allow-Headers", "Content-Type"}});
  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto view = engine()->search(req.get_param_value("q"), size_param(req, "limit"), req.get_param_value("cursor"));
      send_json(res, 200, view.to_json());
    });
  });

  s.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
    std::string text = req.body;
    std::optional<std::size_t> limit;
    std::string cursor = req.get_param_value("cursor");
    if (req.get_header_value("Content-Type").starts_with("application/json")) {
      auto body = json::parse(req.body, nullptr, false);
      if (body.is_object() && body.contains("query") && body["query"].is_string()) {
        text = body["query"].get<std::string>();
        if (body.contains("limit") && body["limit"].is_number_unsigned()) limit = body["limit"].get<std::size_t>();
        if (body.contains("cursor") && body["cursor"].is_string()) cursor = body["cursor"].get<std::string>();
      }
    }
    guarded(
        res,
        [&] {
          if (!limit) limit = size_param(req, "limit");
          auto ast = parse_query(text);
          auto view = engine()->execute(ast, limit, cursor);
          auto out = view.to_json();
          out["query"] = print_query(ast);
          send_json(res, 200, out);
        },
        text);
  });

  s.Get(R"(/nodes/([^/]+)/neighbors)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, engine()->neighbors(req.matches[1], size_param(req, "limit")).to_json()); });
  });

  s.Get(R"(/nodes/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, engine()->node_detail(req.matches[1])); });
  });

  s.Get("/random", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::uint64_t seed = size_param(req, "seed").value_or(0);
      send_json(res, 200, engine()->random_subgraph(size_param(req, "size"), seed).to_json());
    });
  });

  s.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, engine()->stats()); });
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(json{{"code", res.status == 404 ? "NotFound" : "BadRequest"}, {"message", "no such route"}}.dump(),
                      "application/json");
    }
  });
}

int ApiServer::start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  spdlog::info("serving on http://{}:{}", host, bound);
  return bound;
}

void ApiServer::listen(const std::string& host, int port) {
  if (!server_->bind_to_port(host, port)) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  spdlog::info("serving on http://{}:{}", host, port);
  server_->listen_after_bind();
}

void ApiServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace skg::query
