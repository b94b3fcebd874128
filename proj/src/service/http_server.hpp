#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "newshub/service/service.hpp"

namespace newshub::service::detail {

// Thin adapter from the HTTP library to Service::handle.
class HttpServer {
 public:
  HttpServer(std::function<Response(const Request&)> handler, std::optional<std::filesystem::path> ui_dir);
  ~HttpServer();

  // Returns the bound port; Errc::io on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace newshub::service::detail
