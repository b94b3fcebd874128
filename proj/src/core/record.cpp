#include "newshub/record.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "newshub/error.hpp"

namespace newshub {

using nlohmann::json;

json to_json(const ConsolidatedRecord& rec) {
  json j = json::object();
  j["id"] = rec.id;
  j["dataset"] = rec.dataset;
  j["text"] = rec.text;
  if (rec.label) j["label"] = to_int(*rec.label);
  if (rec.url) j["url"] = *rec.url;
  if (rec.published_at) j["published_at"] = format_rfc3339(*rec.published_at);
  if (rec.keyword_group) j["keyword_group"] = *rec.keyword_group;
  return j;
}

namespace {

std::optional<std::string> opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(Errc::input, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

ConsolidatedRecord record_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::input, "record must be a JSON object");
  ConsolidatedRecord rec;
  auto id = j.find("id");
  if (id == j.end()) throw Error(Errc::input, "record missing 'id'");
  // Numeric ids from external tools are accepted and stringified.
  rec.id = id->is_string() ? id->get<std::string>() : id->dump();
  rec.dataset = opt_string(j, "dataset").value_or("");
  rec.text = opt_string(j, "text").value_or("");
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw Error(Errc::input, "label must be 0 or 1 in record " + rec.id);
    rec.label = label_from_int(it->get<long long>());
  }
  rec.url = opt_string(j, "url");
  if (auto ts = opt_string(j, "published_at")) {
    rec.published_at = parse_timestamp(*ts);
    if (!rec.published_at) throw Error(Errc::input, "bad published_at '" + *ts + "' in record " + rec.id);
  }
  rec.keyword_group = opt_string(j, "keyword_group");
  return rec;
}

Corpus read_corpus_jsonl(std::istream& in) {
  Corpus out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw Error(Errc::parse, "malformed JSON on line " + std::to_string(line_no));
    try {
      out.push_back(record_from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
    }
  }
  return out;
}

Corpus read_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  return read_corpus_jsonl(in);
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& rec : corpus) out << to_json(rec).dump() << '\n';
}

void write_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  write_corpus_jsonl(out, corpus);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_corpus_csv(std::ostream& out, const Corpus& corpus) {
  out << "Dataset,Text,Label\r\n";
  for (const auto& rec : corpus) {
    out << csv_escape(rec.dataset) << ',' << csv_escape(rec.text) << ',';
    if (rec.label) out << to_int(*rec.label);
    out << "\r\n";
  }
}

}  // namespace newshub
