#include "newshub/labeling/llm.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "newshub/error.hpp"

namespace newshub::labeling {

using nlohmann::json;

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

}  // namespace

LlmEndpoint LlmEndpoint::from_env() {
  LlmEndpoint e;
  e.base_url = env_or_empty("NEWSHUB_LLM_BASE_URL");
  e.api_key = env_or_empty("NEWSHUB_LLM_API_KEY");
  e.model = env_or_empty("NEWSHUB_LLM_MODEL");
  if (e.base_url.empty()) throw Error(Errc::config, "NEWSHUB_LLM_BASE_URL is not set");
  if (e.model.empty()) throw Error(Errc::config, "NEWSHUB_LLM_MODEL is not set");
  while (!e.base_url.empty() && e.base_url.back() == '/') e.base_url.pop_back();
  return e;
}

json build_chat_request(const LlmEndpoint& endpoint, const std::string& prompt) {
  return {{"model", endpoint.model},
          {"temperature", endpoint.temperature},
          {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
}

std::string parse_chat_response(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::upstream, "completion response is not JSON");
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(Errc::upstream, "completion content is not a string");
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw Error(Errc::upstream, "completion response lacks choices[0].message.content");
  }
}

StubCompletionClient StubCompletionClient::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open stub responses " + path.string());
  std::map<std::string, std::string> responses;
  std::string model = "stub";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw Error(Errc::parse, path.string() + ": malformed line " + std::to_string(line_no));
    if (j.contains("model_name") && !j.contains("record_id")) {
      model = j["model_name"].get<std::string>();
      continue;
    }
    responses[j.at("record_id").get<std::string>()] = j.at("response").get<std::string>();
  }
  return StubCompletionClient(std::move(responses), std::move(model));
}

std::string StubCompletionClient::complete(const CompletionRequest& request) {
  auto it = responses_.find(request.record_id);
  if (it == responses_.end())
    throw Error(Errc::not_found, "stub has no canned response for record " + request.record_id);
  return it->second;
}

std::string_view default_prompt_template() {
  return "You are verifying news items for a fact-checking corpus.\n"
         "Decide whether the following news excerpt is fake (fabricated, misleading or "
         "deceptive) or real (accurate reporting).\n"
         "Answer with exactly one word on the first line: FAKE or REAL. You may add a "
         "one-sentence justification on the second line.\n\n"
         "Source: {dataset}\n"
         "Excerpt:\n{text}\n";
}

std::string render_prompt(std::string_view tmpl, const ConsolidatedRecord& record) {
  std::string out;
  out.reserve(tmpl.size() + record.text.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        std::string_view key = tmpl.substr(i + 1, close - i - 1);
        const std::string* value = nullptr;
        if (key == "text") value = &record.text;
        else if (key == "dataset") value = &record.dataset;
        else if (key == "id") value = &record.id;
        if (value) {
          out += *value;
          i = close;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
  }
  return out;
}

Label parse_verdict(std::string_view response) {
  std::string_view first = response.substr(0, response.find('\n'));
  bool fake = false, real = false;
  std::string word;
  auto flush = [&] {
    if (word == "fake") fake = true;
    if (word == "real") real = true;
    word.clear();
  };
  for (char c : first) {
    if (std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80)
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else
      flush();
  }
  flush();
  if (fake == real)
    throw Error(Errc::unparseable_verdict,
                std::string("no single FAKE/REAL verdict in first response line: '") +
                    std::string(first.substr(0, 120)) + "'");
  return fake ? Label::fake : Label::real;
}

LabelSuggestion suggest_label(const ConsolidatedRecord& record, CompletionClient& client,
                              std::string_view prompt_template, Timestamp now) {
  if (record.text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw Error(Errc::input, "record " + record.id + " has empty text");
  CompletionRequest req{record.id, render_prompt(prompt_template, record)};
  LabelSuggestion s;
  s.record_id = record.id;
  s.raw_response = client.complete(req);
  s.suggested_label = parse_verdict(s.raw_response);
  s.model_name = client.model_name();
  s.created_at = now;
  return s;
}

}  // namespace newshub::labeling
