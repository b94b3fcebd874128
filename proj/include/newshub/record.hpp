#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "newshub/label.hpp"
#include "newshub/time.hpp"

namespace newshub {

// One news item in the unified corpus schema.
struct ConsolidatedRecord {
  std::string id;
  std::string dataset;
  std::string text;
  std::optional<Label> label;
  std::optional<std::string> url;
  std::optional<Timestamp> published_at;
  std::optional<std::string> keyword_group;

  bool operator==(const ConsolidatedRecord&) const = default;
};

using Corpus = std::vector<ConsolidatedRecord>;

// JSON-Lines field names: id, dataset, text, label, url, published_at,
// keyword_group. Unset optionals are omitted.
nlohmann::json to_json(const ConsolidatedRecord& rec);
ConsolidatedRecord record_from_json(const nlohmann::json& j);

// Throws Error(Errc::parse) naming the line number on malformed input.
Corpus read_corpus_jsonl(std::istream& in);
Corpus read_corpus_jsonl(const std::filesystem::path& path);
void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);
void write_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus);

// CSV with header `Dataset,Text,Label`; RFC-4180 quoting, empty label cell
// for unlabeled records.
void write_corpus_csv(std::ostream& out, const Corpus& corpus);

std::string csv_escape(const std::string& field);

}  // namespace newshub
