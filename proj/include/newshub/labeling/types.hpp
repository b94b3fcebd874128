#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "newshub/label.hpp"
#include "newshub/time.hpp"

namespace newshub::labeling {

enum class Role { ml_scientist, data_scientist, linguist, student, other };

const char* to_string(Role role) noexcept;
Role role_from_string(const std::string& s);

struct Annotator {
  std::string id;
  std::string display_name;
  Role role = Role::other;

  bool operator==(const Annotator&) const = default;
};

// Reads a JSON array (or JSON-Lines) of {id, display_name, role}. Extra
// fields such as "token" are ignored here.
std::vector<Annotator> load_annotators(const std::filesystem::path& path);

enum class AssignmentState { pending, submitted };

struct Assignment {
  std::string id;
  std::string record_id;
  std::string annotator_id;
  AssignmentState state = AssignmentState::pending;
  // 1 for the two independent first-round reviews, 2 for the tie-break.
  int round = 1;

  bool operator==(const Assignment&) const = default;
};

struct Review {
  std::string assignment_id;
  std::string record_id;
  std::string annotator_id;
  Label label = Label::real;
  std::optional<std::string> note;
  Timestamp submitted_at{};
  int round = 1;

  bool operator==(const Review&) const = default;
};

// Audit entry for a corrected review. The review's effective label becomes
// new_label; both values stay in the journal.
struct Supersede {
  std::string assignment_id;
  Label old_label = Label::real;
  Label new_label = Label::real;
  std::string actor;
  std::string reason;
  Timestamp at{};
};

enum class AdjudicationStatus { agreed, needs_adjudication, adjudicated_by_third };

const char* to_string(AdjudicationStatus s) noexcept;

struct AdjudicatedLabel {
  std::string record_id;
  std::optional<Label> final_label;
  AdjudicationStatus status = AdjudicationStatus::needs_adjudication;
  std::optional<std::string> resolver_id;

  bool resolved() const noexcept { return status != AdjudicationStatus::needs_adjudication; }
  bool operator==(const AdjudicatedLabel&) const = default;
};

struct LabelSuggestion {
  std::string record_id;
  Label suggested_label = Label::real;
  std::string raw_response;
  std::string model_name;
  Timestamp created_at{};

  bool operator==(const LabelSuggestion&) const = default;
};

nlohmann::json to_json(const Annotator& a);
nlohmann::json to_json(const Assignment& a);
nlohmann::json to_json(const Review& r);
nlohmann::json to_json(const AdjudicatedLabel& a);
nlohmann::json to_json(const LabelSuggestion& s);
LabelSuggestion suggestion_from_json(const nlohmann::json& j);

}  // namespace newshub::labeling
