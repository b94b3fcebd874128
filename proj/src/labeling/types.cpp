#include "newshub/labeling/types.hpp"

#include <fstream>
#include <sstream>

#include "newshub/error.hpp"

namespace newshub::labeling {

using nlohmann::json;

const char* to_string(Role role) noexcept {
  switch (role) {
    case Role::ml_scientist: return "ml_scientist";
    case Role::data_scientist: return "data_scientist";
    case Role::linguist: return "linguist";
    case Role::student: return "student";
    case Role::other: return "other";
  }
  return "other";
}

Role role_from_string(const std::string& s) {
  if (s == "ml_scientist") return Role::ml_scientist;
  if (s == "data_scientist") return Role::data_scientist;
  if (s == "linguist") return Role::linguist;
  if (s == "student") return Role::student;
  if (s == "other" || s.empty()) return Role::other;
  throw Error(Errc::input, "unknown annotator role '" + s + "'");
}

const char* to_string(AdjudicationStatus s) noexcept {
  switch (s) {
    case AdjudicationStatus::agreed: return "agreed";
    case AdjudicationStatus::needs_adjudication: return "needs_adjudication";
    case AdjudicationStatus::adjudicated_by_third: return "adjudicated_by_third";
  }
  return "needs_adjudication";
}

std::vector<Annotator> load_annotators(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open annotators file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  std::vector<json> items;
  json whole = json::parse(text, nullptr, false);
  if (!whole.is_discarded() && whole.is_array()) {
    for (auto& j : whole) items.push_back(j);
  } else {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) throw Error(Errc::parse, "malformed annotator line in " + path.string());
      items.push_back(std::move(j));
    }
  }
  std::vector<Annotator> out;
  for (const auto& j : items) {
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
      throw Error(Errc::input, "annotator entries need a string 'id'");
    Annotator a;
    a.id = j["id"].get<std::string>();
    a.display_name = j.value("display_name", a.id);
    a.role = role_from_string(j.value("role", std::string("other")));
    out.push_back(std::move(a));
  }
  return out;
}

json to_json(const Annotator& a) {
  return {{"id", a.id}, {"display_name", a.display_name}, {"role", to_string(a.role)}};
}

json to_json(const Assignment& a) {
  return {{"id", a.id},
          {"record_id", a.record_id},
          {"annotator_id", a.annotator_id},
          {"state", a.state == AssignmentState::pending ? "pending" : "submitted"},
          {"round", a.round}};
}

json to_json(const Review& r) {
  json j = {{"assignment_id", r.assignment_id},
            {"record_id", r.record_id},
            {"annotator_id", r.annotator_id},
            {"label", to_int(r.label)},
            {"submitted_at", format_rfc3339(r.submitted_at)},
            {"round", r.round}};
  if (r.note) j["note"] = *r.note;
  return j;
}

json to_json(const AdjudicatedLabel& a) {
  json j = {{"record_id", a.record_id}, {"status", to_string(a.status)}};
  j["final_label"] = a.final_label ? json(to_int(*a.final_label)) : json(nullptr);
  j["resolver_id"] = a.resolver_id ? json(*a.resolver_id) : json(nullptr);
  return j;
}

json to_json(const LabelSuggestion& s) {
  return {{"record_id", s.record_id},
          {"suggested_label", to_int(s.suggested_label)},
          {"raw_response", s.raw_response},
          {"model_name", s.model_name},
          {"created_at", format_rfc3339(s.created_at)}};
}

LabelSuggestion suggestion_from_json(const json& j) {
  LabelSuggestion s;
  s.record_id = j.at("record_id").get<std::string>();
  s.suggested_label = label_from_int(j.at("suggested_label").get<long long>());
  s.raw_response = j.value("raw_response", std::string());
  s.model_name = j.value("model_name", std::string());
  auto ts = parse_timestamp(j.value("created_at", std::string()));
  if (!ts) throw Error(Errc::input, "suggestion for " + s.record_id + " has a bad created_at");
  s.created_at = *ts;
  return s;
}

}  // namespace newshub::labeling
