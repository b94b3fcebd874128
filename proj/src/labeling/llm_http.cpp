#include "httplib.h"

#include "newshub/error.hpp"
#include "newshub/labeling/llm.hpp"

namespace newshub::labeling {

std::string HttpCompletionClient::complete(const CompletionRequest& request) {
  const std::string& base = endpoint_.base_url;
  auto sep = base.find("://");
  if (sep == std::string::npos) throw Error(Errc::config, "LLM base URL lacks a scheme: " + base);
  auto path_start = base.find('/', sep + 3);
  std::string origin = path_start == std::string::npos ? base : base.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base.substr(path_start);

  httplib::Client cli(origin);
  cli.set_connection_timeout(endpoint_.timeout);
  cli.set_read_timeout(endpoint_.timeout);
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  std::string body = build_chat_request(endpoint_, request.prompt).dump();
  auto res = cli.Post(prefix + "/chat/completions", headers, body, "application/json");
  if (!res) throw Error(Errc::transport, "LLM request failed: " + httplib::to_string(res.error()));
  // Rate limiting and server errors are worth retrying.
  if (res->status == 429 || res->status >= 500)
    throw Error(Errc::transport, "LLM endpoint returned HTTP " + std::to_string(res->status));
  if (res->status >= 400) throw UpstreamError(res->status, "LLM endpoint rejected the request");
  return parse_chat_response(res->body);
}

}  // namespace newshub::labeling
