#include "http_server.hpp"

#include <algorithm>
#include <cctype>

#include "httplib.h"
#include "newshub/error.hpp"

namespace newshub::service::detail {

struct HttpServer::Impl {
  httplib::Server server;
  std::function<Response(const Request&)> handler;
};

HttpServer::HttpServer(std::function<Response(const Request&)> handler, std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  if (ui_dir && !impl_->server.set_mount_point("/", ui_dir->string()))
    throw Error(Errc::config, "UI directory " + ui_dir->string() + " does not exist");

  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) {
      std::string key = k;
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
      r.headers[key] = v;
    }
    r.body = req.body;
    Response out = impl_->handler(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  impl_->server.Get(".*", forward);
  impl_->server.Post(".*", forward);
  impl_->server.Put(".*", forward);
  impl_->server.Delete(".*", forward);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error(Errc::io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace newshub::service::detail
