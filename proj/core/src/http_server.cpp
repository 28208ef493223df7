#include "bounty/http_server.hpp"

#include <charconv>

#include <httplib.h>

#include "bounty/error.hpp"

namespace bounty {

struct HttpServer::Impl {
  explicit Impl(BountyService& s) : service(s) {}

  BountyService& service;
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const ApiResult& result) {
  res.status = result.status;
  for (const auto& [k, v] : result.headers) res.set_header(k, v);
  res.set_content(result.body, result.content_type);
}

std::string authorization(const httplib::Request& req) { return req.get_header_value("Authorization"); }

std::uint64_t query_number(const httplib::Request& req, const char* key, std::uint64_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto text = req.get_param_value(key);
  std::uint64_t value = fallback;
  std::from_chars(text.data(), text.data() + text.size(), value);
  return value;
}

}  // namespace

HttpServer::HttpServer(BountyService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& s = impl_->server;
  auto& svc = impl_->service;
  s.set_payload_max_length(64u << 20);
  s.set_read_timeout(30, 0);
  s.set_write_timeout(30, 0);

  s.Post("/submissions", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.submit(authorization(req), req.body));
  });
  s.Get(R"(/submissions/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.submission(authorization(req), req.matches[1].str()));
  });
  s.Get("/leaderboard", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.leaderboard()); });
  s.Get(R"(/model/global/([^/]+)/train-predictions)", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.train_predictions(req.matches[1].str()));
  });
  s.Get("/events", [&svc](const httplib::Request& req, httplib::Response& res) {
    const auto since = query_number(req, "since", 0);
    const auto wait = std::min<std::uint64_t>(query_number(req, "wait", 0), 25'000);
    send(res, svc.events(since, std::chrono::milliseconds(wait)));
  });
  s.Post("/admin/teams", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.add_team(authorization(req), req.body));
  });
  s.Delete(R"(/admin/teams/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.remove_team(authorization(req), req.matches[1].str()));
  });
  s.Get("/admin/state", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.admin_state(authorization(req)));
  });
  s.Post("/admin/freeze", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.freeze(authorization(req)));
  });
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const auto code = res.status == 404 ? "NotFound" : "HttpError";
      res.set_content(nlohmann::json{{"error", code}, {"message", "no such endpoint"}}.dump(), "application/json");
    }
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(nlohmann::json{{"error", "Internal"}, {"message", message}}.dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& s = impl_->server;
  port_ = port == 0 ? s.bind_to_any_port(host) : (s.bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return port_;
}

void HttpServer::run(const std::string& host, int port) {
  auto& s = impl_->server;
  if (!s.bind_to_port(host, port)) throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
  port_ = port;
  s.listen_after_bind();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace bounty
