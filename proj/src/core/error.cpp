#include "newshub/error.hpp"

#include "newshub/label.hpp"

namespace newshub {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::input: return "input";
    case Errc::parse: return "parse";
    case Errc::transport: return "transport";
    case Errc::upstream: return "upstream";
    case Errc::config: return "config";
    case Errc::empty_input: return "empty_input";
    case Errc::empty_corpus: return "empty_corpus";
    case Errc::unparseable_verdict: return "unparseable_verdict";
    case Errc::conflict: return "conflict";
    case Errc::integrity: return "integrity";
    case Errc::undefined_kappa: return "undefined_kappa";
    case Errc::export_blocked: return "export_blocked";
    case Errc::gate_failed: return "gate_failed";
    case Errc::training: return "training";
    case Errc::degenerate_learner: return "degenerate_learner";
    case Errc::validation: return "validation";
    case Errc::not_found: return "not_found";
    case Errc::io: return "io";
  }
  return "unknown";
}

namespace {

std::string join_ids(const std::string& what, const std::vector<std::string>& ids) {
  std::string out = what;
  out += ": ";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    if (i == 20) {
      out += "... (" + std::to_string(ids.size()) + " total)";
      break;
    }
    out += ids[i];
  }
  return out;
}

}  // namespace

IdListError::IdListError(Errc code, const std::string& what, std::vector<std::string> ids)
    : Error(code, join_ids(what, ids)), ids_(std::move(ids)) {}

Label label_from_int(long long v) {
  if (v == 0) return Label::real;
  if (v == 1) return Label::fake;
  throw Error(Errc::input, "label must be 0 or 1, got " + std::to_string(v));
}

std::vector<Label> labels_from_ints(std::span<const int> values) {
  std::vector<Label> out;
  out.reserve(values.size());
  for (int v : values) out.push_back(label_from_int(v));
  return out;
}

std::vector<int> labels_to_ints(std::span<const Label> labels) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (Label l : labels) out.push_back(to_int(l));
  return out;
}

}  // namespace newshub
