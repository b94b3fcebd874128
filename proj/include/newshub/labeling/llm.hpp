#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"
#include "newshub/labeling/types.hpp"
#include "newshub/record.hpp"

namespace newshub::labeling {

struct CompletionRequest {
  std::string record_id;
  std::string prompt;
};

// A chat-completion style model endpoint that returns raw response text.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  // Throws Error(Errc::transport) for retriable failures.
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string model_name() const = 0;
};

struct LlmEndpoint {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string api_key;
  std::string model;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60'000};

  // NEWSHUB_LLM_BASE_URL, NEWSHUB_LLM_API_KEY, NEWSHUB_LLM_MODEL. Throws
  // Error(Errc::config) when base URL or model is missing.
  static LlmEndpoint from_env();
};

// {"model", "temperature", "messages":[{"role":"user","content":prompt}]}
nlohmann::json build_chat_request(const LlmEndpoint& endpoint, const std::string& prompt);

// choices[0].message.content. Throws Error(Errc::upstream) on any other
// shape.
std::string parse_chat_response(const std::string& body);

// POSTs to <base_url>/chat/completions.
class HttpCompletionClient : public CompletionClient {
 public:
  explicit HttpCompletionClient(LlmEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

  std::string complete(const CompletionRequest& request) override;
  std::string model_name() const override { return endpoint_.model; }

 private:
  LlmEndpoint endpoint_;
};

// Canned responses keyed by record id, for offline runs. File format is
// JSON-Lines of {"record_id", "response"}; an optional first line
// {"model_name": "..."} names the model.
class StubCompletionClient : public CompletionClient {
 public:
  explicit StubCompletionClient(std::map<std::string, std::string> responses,
                                std::string model = "stub")
      : responses_(std::move(responses)), model_(std::move(model)) {}

  static StubCompletionClient from_file(const std::filesystem::path& path);

  // Unknown record id -> Error(Errc::not_found).
  std::string complete(const CompletionRequest& request) override;
  std::string model_name() const override { return model_; }

 private:
  std::map<std::string, std::string> responses_;
  std::string model_;
};

// Shipped default: asks for a one-word FAKE/REAL verdict on the first line.
std::string_view default_prompt_template();

// Substitutes {text}, {dataset} and {id}.
std::string render_prompt(std::string_view tmpl, const ConsolidatedRecord& record);

// Looks for FAKE or REAL (any case) as a standalone word in the first line.
// Neither or both -> Error(Errc::unparseable_verdict).
Label parse_verdict(std::string_view response);

LabelSuggestion suggest_label(const ConsolidatedRecord& record, CompletionClient& client,
                              std::string_view prompt_template, Timestamp now);

}  // namespace newshub::labeling
