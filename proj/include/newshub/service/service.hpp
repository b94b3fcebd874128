#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "newshub/labeling/types.hpp"
#include "newshub/labeling/workflow.hpp"
#include "newshub/record.hpp"
#include "newshub/service/jobs.hpp"

namespace newshub::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  // Holds corpus.jsonl, annotators.json, journal.jsonl and artifacts/.
  std::filesystem::path store_dir;
  std::optional<std::filesystem::path> ui_dir;
  // Session that may toggle suggestion visibility and always sees them.
  std::string admin_token;
  std::size_t workers = 2;
  // Canned LLM responses used by suggest jobs instead of the live endpoint.
  std::optional<std::filesystem::path> llm_stub;
  std::uint64_t seed = 7;
};

// Key/value file ("key = value", '#' comments) with keys host, port, store,
// ui_dir, admin_token, workers, llm_stub, seed. Relative paths resolve
// against the file's directory.
ServiceConfig load_service_config(const std::filesystem::path& path);
// NEWSHUB_STORE, NEWSHUB_UI_DIR, NEWSHUB_PORT, NEWSHUB_ADMIN_TOKEN,
// NEWSHUB_LLM_STUB override the corresponding settings.
void apply_env_overrides(ServiceConfig& config);

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  // Lower-case header names.
  std::map<std::string, std::string> headers;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct Session {
  std::string annotator_id;
  bool admin = false;
};

// Loaded store plus the HTTP JSON API. Routes live under both /api and
// /api/v1; handle() is usable without a socket.
class Service {
 public:
  // Errc::config when the store directory or its files are missing.
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response handle(const Request& request);

  // Binds and serves on a background thread; returns the bound port
  // (config port 0 picks a free one). Errc::io when binding fails.
  int start();
  // Blocks serving until stop() is called from another thread or a signal.
  void run();
  // Stops accepting, lets in-flight requests finish, stops the job pool.
  void stop();

  labeling::LabelingStore& store();
  JobManager& jobs();
  const ServiceConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Annotator entries of annotators.json keep an optional "token".
struct AnnotatorAccount {
  labeling::Annotator annotator;
  std::string token;
};
std::vector<AnnotatorAccount> load_accounts(const std::filesystem::path& path);

}  // namespace newshub::service
