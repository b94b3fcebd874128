#include "httplib.h"

#include "newshub/error.hpp"
#include "newshub/ingest/feed.hpp"

namespace newshub::ingest {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // /path?query
};

SplitUrl split_url(const std::string& url) {
  auto sep = url.find("://");
  auto path_start = url.find('/', sep + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string HttpTransport::get(const std::string& url, std::chrono::milliseconds timeout) {
  if (!is_valid_url(url) || url.rfind("file://", 0) == 0)
    throw Error(Errc::input, "not an http(s) URL: " + url);
  auto [origin, path] = split_url(url);
  httplib::Client cli(origin);
  cli.set_follow_location(true);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  auto res = cli.Get(path);
  if (!res) {
    throw Error(Errc::transport, "fetching " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status >= 400) throw UpstreamError(res->status, "fetching " + url);
  return res->body;
}

}  // namespace newshub::ingest
