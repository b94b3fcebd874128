#include "newshub/labeling/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <shared_mutex>

#include "newshub/error.hpp"
#include "newshub/random.hpp"

namespace newshub::labeling {

using nlohmann::json;

std::vector<Assignment> assign_reviews(std::span<const std::string> record_ids,
                                       std::span<const Annotator> annotators, std::uint64_t seed) {
  if (annotators.size() < 2)
    throw Error(Errc::config, "at least two annotators are required, got " +
                                  std::to_string(annotators.size()));
  {
    std::set<std::string> ids;
    for (const auto& a : annotators)
      if (!ids.insert(a.id).second) throw Error(Errc::config, "duplicate annotator id '" + a.id + "'");
    std::set<std::string> recs;
    for (const auto& r : record_ids)
      if (!recs.insert(r).second) throw Error(Errc::input, "duplicate record id '" + r + "'");
  }

  Rng rng = make_rng(seed);
  const std::size_t m = annotators.size();
  std::vector<std::size_t> load(m, 0);
  std::vector<std::uint64_t> key(m);
  std::vector<std::size_t> order(m);
  std::vector<Assignment> out;
  out.reserve(record_ids.size() * 2);
  for (const auto& rec : record_ids) {
    for (auto& k : key) k = rng();
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + 2, order.end(), [&](std::size_t x, std::size_t y) {
      if (load[x] != load[y]) return load[x] < load[y];
      if (key[x] != key[y]) return key[x] < key[y];
      return x < y;
    });
    const char* slots[2] = {"/r1a", "/r1b"};
    for (int s = 0; s < 2; ++s) {
      std::size_t who = order[static_cast<std::size_t>(s)];
      ++load[who];
      out.push_back(Assignment{rec + slots[s], rec, annotators[who].id, AssignmentState::pending, 1});
    }
  }
  return out;
}

AdjudicatedLabel adjudicate(const std::string& record_id, std::span<const Review> reviews) {
  if (reviews.size() != 2 && reviews.size() != 3)
    throw Error(Errc::input, "adjudication needs two or three reviews, got " +
                                 std::to_string(reviews.size()) + " for record " + record_id);
  std::set<std::string> who;
  for (const auto& r : reviews) {
    if (!who.insert(r.annotator_id).second)
      throw Error(Errc::integrity, "record " + record_id + " has two reviews from annotator " +
                                       r.annotator_id);
  }
  AdjudicatedLabel out;
  out.record_id = record_id;
  if (reviews.size() == 2) {
    if (reviews[0].label == reviews[1].label) {
      out.status = AdjudicationStatus::agreed;
      out.final_label = reviews[0].label;
    } else {
      out.status = AdjudicationStatus::needs_adjudication;
    }
    return out;
  }
  std::size_t fake_votes = 0;
  for (const auto& r : reviews) fake_votes += r.label == Label::fake;
  out.status = AdjudicationStatus::adjudicated_by_third;
  out.final_label = fake_votes >= 2 ? Label::fake : Label::real;
  for (const auto& r : reviews)
    if (r.round == 2) out.resolver_id = r.annotator_id;
  return out;
}

// ---------------------------------------------------------------------------

struct LabelingStore::Impl {
  mutable std::shared_mutex mu;
  std::unique_ptr<std::ofstream> journal;

  std::vector<Annotator> annotators;
  std::vector<Assignment> assignments;
  std::map<std::string, std::size_t> assignment_index;
  std::map<std::string, std::vector<std::size_t>> by_record;
  std::map<std::string, Review> reviews;  // keyed by assignment id
  std::vector<Supersede> supersedes;
  std::map<std::string, LabelSuggestion> suggestions;
  bool suggestions_visible = false;

  void log(const json& event) {
    if (!journal) return;
    *journal << event.dump() << '\n';
    journal->flush();
    if (!*journal) throw Error(Errc::io, "failed to append to labeling journal");
  }

  const Annotator* find_annotator(const std::string& id) const {
    for (const auto& a : annotators)
      if (a.id == id) return &a;
    return nullptr;
  }

  Assignment* find_assignment(const std::string& id) {
    auto it = assignment_index.find(id);
    return it == assignment_index.end() ? nullptr : &assignments[it->second];
  }

  const Review* find_review(const std::string& assignment_id) const {
    auto it = reviews.find(assignment_id);
    return it == reviews.end() ? nullptr : &it->second;
  }

  // First-round reviews of a record in slot order; empty unless both exist.
  std::vector<const Review*> first_round(const std::string& record_id) const {
    std::vector<const Review*> out;
    auto it = by_record.find(record_id);
    if (it == by_record.end()) return out;
    for (std::size_t idx : it->second) {
      const auto& a = assignments[idx];
      if (a.round != 1) continue;
      const Review* r = find_review(a.id);
      if (!r) return {};
      out.push_back(r);
    }
    if (out.size() != 2) out.clear();
    return out;
  }

  const Review* third_review(const std::string& record_id) const {
    auto it = by_record.find(record_id);
    if (it == by_record.end()) return nullptr;
    for (std::size_t idx : it->second)
      if (assignments[idx].round == 2) return find_review(assignments[idx].id);
    return nullptr;
  }

  std::optional<AdjudicatedLabel> adjudication_of(const std::string& record_id) const {
    auto first = first_round(record_id);
    if (first.empty()) return std::nullopt;
    std::vector<Review> rs{*first[0], *first[1]};
    if (const Review* third = third_review(record_id)) rs.push_back(*third);
    return adjudicate(record_id, rs);
  }

  void apply_annotator(const Annotator& a) {
    if (find_annotator(a.id)) throw Error(Errc::config, "annotator '" + a.id + "' already registered");
    annotators.push_back(a);
  }

  void check_assignments(std::span<const Assignment> batch) const {
    std::map<std::string, std::vector<const Assignment*>> per_record;
    for (const auto& a : batch) {
      if (a.round != 1) throw Error(Errc::input, "only first-round assignments can be added in bulk");
      if (assignment_index.count(a.id)) throw Error(Errc::conflict, "assignment " + a.id + " already exists");
      if (!annotators.empty() && !find_annotator(a.annotator_id))
        throw Error(Errc::not_found, "unknown annotator '" + a.annotator_id + "'");
      per_record[a.record_id].push_back(&a);
    }
    for (const auto& [rec, list] : per_record) {
      if (by_record.count(rec)) throw Error(Errc::conflict, "record " + rec + " is already assigned");
      if (list.size() != 2)
        throw Error(Errc::integrity, "record " + rec + " must get exactly two assignments");
      if (list[0]->annotator_id == list[1]->annotator_id)
        throw Error(Errc::integrity, "record " + rec + " assigned twice to " + list[0]->annotator_id);
    }
  }

  void apply_assignment(Assignment a) {
    a.state = AssignmentState::pending;
    assignment_index[a.id] = assignments.size();
    by_record[a.record_id].push_back(assignments.size());
    assignments.push_back(std::move(a));
  }

  ReviewOutcome apply_review(const std::string& assignment_id, Label label,
                             std::optional<std::string> note, Timestamp at) {
    Assignment* a = find_assignment(assignment_id);
    if (!a) throw Error(Errc::not_found, "unknown assignment " + assignment_id);
    if (const Review* existing = find_review(assignment_id)) {
      if (existing->label == label) return {*existing, false};
      throw Error(Errc::conflict, "assignment " + assignment_id + " already has label " +
                                      std::to_string(to_int(existing->label)) +
                                      "; use supersede to correct it");
    }
    Review r{assignment_id, a->record_id, a->annotator_id, label, std::move(note), at, a->round};
    a->state = AssignmentState::submitted;
    reviews[assignment_id] = r;
    return {r, true};
  }

  Review apply_supersede(const Supersede& s) {
    auto it = reviews.find(s.assignment_id);
    if (it == reviews.end())
      throw Error(Errc::not_found, "no review to supersede on assignment " + s.assignment_id);
    it->second.label = s.new_label;
    supersedes.push_back(s);
    return it->second;
  }

  void check_third(const std::string& record_id, const std::string& annotator_id) const {
    if (!annotators.empty() && !find_annotator(annotator_id))
      throw Error(Errc::not_found, "unknown annotator '" + annotator_id + "'");
    auto first = first_round(record_id);
    if (first.empty())
      throw Error(Errc::input, "record " + record_id + " does not have both first-round reviews");
    for (const Review* r : first) {
      if (r->annotator_id == annotator_id)
        throw Error(Errc::integrity, "annotator " + annotator_id + " already reviewed record " + record_id);
    }
    if (first[0]->label == first[1]->label)
      throw Error(Errc::input, "record " + record_id + " does not need adjudication");
  }

  ReviewOutcome apply_third(const std::string& record_id, const std::string& annotator_id, Label label,
                            std::optional<std::string> note, Timestamp at) {
    std::string id = record_id + "/r2";
    assignment_index[id] = assignments.size();
    by_record[record_id].push_back(assignments.size());
    assignments.push_back(Assignment{id, record_id, annotator_id, AssignmentState::pending, 2});
    return apply_review(id, label, std::move(note), at);
  }

  void replay(const json& ev) {
    const std::string type = ev.at("type").get<std::string>();
    auto ts = [&](const char* key) {
      auto t = parse_timestamp(ev.at(key).get<std::string>());
      if (!t) throw Error(Errc::parse, "bad timestamp in journal");
      return *t;
    };
    auto note = [&]() -> std::optional<std::string> {
      if (ev.contains("note") && ev["note"].is_string()) return ev["note"].get<std::string>();
      return std::nullopt;
    };
    if (type == "annotator") {
      apply_annotator(Annotator{ev.at("id"), ev.at("display_name"),
                                role_from_string(ev.at("role").get<std::string>())});
    } else if (type == "assignments") {
      for (const auto& a : ev.at("items"))
        apply_assignment(Assignment{a.at("id"), a.at("record_id"), a.at("annotator_id"),
                                    AssignmentState::pending, 1});
    } else if (type == "review") {
      apply_review(ev.at("assignment_id"), label_from_int(ev.at("label").get<long long>()), note(),
                   ts("at"));
    } else if (type == "third_review") {
      apply_third(ev.at("record_id"), ev.at("annotator_id"),
                  label_from_int(ev.at("label").get<long long>()), note(), ts("at"));
    } else if (type == "supersede") {
      apply_supersede(Supersede{ev.at("assignment_id"), label_from_int(ev.at("old_label").get<long long>()),
                                label_from_int(ev.at("new_label").get<long long>()), ev.at("actor"),
                                ev.at("reason"), ts("at")});
    } else if (type == "suggestion") {
      auto s = suggestion_from_json(ev.at("suggestion"));
      suggestions[s.record_id] = s;
    } else if (type == "visibility") {
      suggestions_visible = ev.at("visible").get<bool>();
    } else {
      throw Error(Errc::parse, "unknown journal event '" + type + "'");
    }
  }
};

LabelingStore::LabelingStore() : impl_(std::make_unique<Impl>()) {}
LabelingStore::~LabelingStore() = default;
LabelingStore::LabelingStore(LabelingStore&&) noexcept = default;
LabelingStore& LabelingStore::operator=(LabelingStore&&) noexcept = default;

LabelingStore LabelingStore::open(const std::filesystem::path& journal) {
  LabelingStore store;
  if (std::filesystem::exists(journal)) {
    std::ifstream in(journal);
    if (!in) throw Error(Errc::io, "cannot read journal " + journal.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json ev = json::parse(line, nullptr, false);
      if (ev.is_discarded())
        throw Error(Errc::parse, journal.string() + ": corrupt journal line " + std::to_string(line_no));
      try {
        store.impl_->replay(ev);
      } catch (const json::exception& e) {
        throw Error(Errc::parse, journal.string() + ": line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  store.impl_->journal = std::make_unique<std::ofstream>(journal, std::ios::app | std::ios::binary);
  if (!*store.impl_->journal) throw Error(Errc::io, "cannot open journal " + journal.string());
  return store;
}

void LabelingStore::add_annotator(const Annotator& annotator) {
  std::unique_lock lock(impl_->mu);
  impl_->apply_annotator(annotator);
  json ev = to_json(annotator);
  ev["type"] = "annotator";
  impl_->log(ev);
}

std::vector<Annotator> LabelingStore::annotators() const {
  std::shared_lock lock(impl_->mu);
  return impl_->annotators;
}

std::optional<Annotator> LabelingStore::annotator(const std::string& id) const {
  std::shared_lock lock(impl_->mu);
  const Annotator* a = impl_->find_annotator(id);
  return a ? std::optional<Annotator>(*a) : std::nullopt;
}

void LabelingStore::add_assignments(std::span<const Assignment> assignments) {
  std::unique_lock lock(impl_->mu);
  impl_->check_assignments(assignments);
  json items = json::array();
  for (const auto& a : assignments) {
    impl_->apply_assignment(a);
    items.push_back({{"id", a.id}, {"record_id", a.record_id}, {"annotator_id", a.annotator_id}});
  }
  impl_->log({{"type", "assignments"}, {"items", items}});
}

std::vector<Assignment> LabelingStore::assignments() const {
  std::shared_lock lock(impl_->mu);
  return impl_->assignments;
}

std::optional<Assignment> LabelingStore::assignment(const std::string& assignment_id) const {
  std::shared_lock lock(impl_->mu);
  auto it = impl_->assignment_index.find(assignment_id);
  if (it == impl_->assignment_index.end()) return std::nullopt;
  return impl_->assignments[it->second];
}

std::vector<Assignment> LabelingStore::queue(const std::string& annotator_id) const {
  std::shared_lock lock(impl_->mu);
  std::vector<Assignment> out;
  for (const auto& a : impl_->assignments)
    if (a.annotator_id == annotator_id && a.state == AssignmentState::pending) out.push_back(a);
  return out;
}

ReviewOutcome LabelingStore::record_review(const std::string& assignment_id, Label label,
                                           std::optional<std::string> note, Timestamp at) {
  std::unique_lock lock(impl_->mu);
  Assignment* a = impl_->find_assignment(assignment_id);
  if (a && a->round != 1)
    throw Error(Errc::input, "assignment " + assignment_id + " is a tie-break; use record_third_review");
  json ev = {{"type", "review"},
             {"assignment_id", assignment_id},
             {"label", to_int(label)},
             {"at", format_rfc3339(at)}};
  if (note) ev["note"] = *note;
  auto outcome = impl_->apply_review(assignment_id, label, std::move(note), at);
  if (outcome.created) impl_->log(ev);
  return outcome;
}

Review LabelingStore::supersede(const std::string& assignment_id, Label new_label,
                                const std::string& actor, const std::string& reason, Timestamp at) {
  std::unique_lock lock(impl_->mu);
  const Review* existing = impl_->find_review(assignment_id);
  if (!existing) throw Error(Errc::not_found, "no review to supersede on assignment " + assignment_id);
  if (existing->label == new_label) return *existing;
  Supersede s{assignment_id, existing->label, new_label, actor, reason, at};
  Review r = impl_->apply_supersede(s);
  impl_->log({{"type", "supersede"},
              {"assignment_id", assignment_id},
              {"old_label", to_int(s.old_label)},
              {"new_label", to_int(new_label)},
              {"actor", actor},
              {"reason", reason},
              {"at", format_rfc3339(at)}});
  return r;
}

std::vector<Supersede> LabelingStore::supersedes() const {
  std::shared_lock lock(impl_->mu);
  return impl_->supersedes;
}

ReviewOutcome LabelingStore::record_third_review(const std::string& record_id,
                                                 const std::string& annotator_id, Label label,
                                                 std::optional<std::string> note, Timestamp at) {
  std::unique_lock lock(impl_->mu);
  if (const Review* third = impl_->third_review(record_id)) {
    if (third->annotator_id != annotator_id)
      throw Error(Errc::conflict, "record " + record_id + " was already adjudicated by " +
                                      third->annotator_id);
    if (third->label == label) return {*third, false};
    throw Error(Errc::conflict, "tie-break on record " + record_id + " already has label " +
                                    std::to_string(to_int(third->label)));
  }
  impl_->check_third(record_id, annotator_id);
  json ev = {{"type", "third_review"},
             {"record_id", record_id},
             {"annotator_id", annotator_id},
             {"label", to_int(label)},
             {"at", format_rfc3339(at)}};
  if (note) ev["note"] = *note;
  auto outcome = impl_->apply_third(record_id, annotator_id, label, std::move(note), at);
  impl_->log(ev);
  return outcome;
}

std::vector<std::string> LabelingStore::adjudication_cases(const std::string& annotator_id) const {
  std::shared_lock lock(impl_->mu);
  std::vector<std::string> out;
  for (const auto& [rec, idx] : impl_->by_record) {
    auto first = impl_->first_round(rec);
    if (first.empty() || first[0]->label == first[1]->label) continue;
    if (impl_->third_review(rec)) continue;
    if (first[0]->annotator_id == annotator_id || first[1]->annotator_id == annotator_id) continue;
    out.push_back(rec);
  }
  return out;
}

std::vector<Review> LabelingStore::reviews() const {
  std::shared_lock lock(impl_->mu);
  std::vector<Review> out;
  for (const auto& a : impl_->assignments)
    if (const Review* r = impl_->find_review(a.id)) out.push_back(*r);
  return out;
}

std::vector<Review> LabelingStore::reviews_for(const std::string& record_id) const {
  std::shared_lock lock(impl_->mu);
  std::vector<Review> out;
  auto it = impl_->by_record.find(record_id);
  if (it == impl_->by_record.end()) return out;
  for (std::size_t idx : it->second)
    if (const Review* r = impl_->find_review(impl_->assignments[idx].id)) out.push_back(*r);
  return out;
}

std::vector<AdjudicatedLabel> LabelingStore::adjudications() const {
  std::shared_lock lock(impl_->mu);
  std::vector<AdjudicatedLabel> out;
  std::set<std::string> done;
  for (const auto& a : impl_->assignments) {
    if (!done.insert(a.record_id).second) continue;
    if (auto adj = impl_->adjudication_of(a.record_id)) out.push_back(std::move(*adj));
  }
  return out;
}

std::optional<AdjudicatedLabel> LabelingStore::adjudication(const std::string& record_id) const {
  std::shared_lock lock(impl_->mu);
  return impl_->adjudication_of(record_id);
}

AgreementSummary LabelingStore::agreement(double gate) const {
  std::shared_lock lock(impl_->mu);
  AgreementSummary summary;
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<Label>, std::vector<Label>>> pairs;
  std::vector<Label> slot_a, slot_b;
  std::set<std::string> seen;
  for (const auto& a : impl_->assignments) {
    if (!seen.insert(a.record_id).second) continue;
    auto first = impl_->first_round(a.record_id);
    if (first.empty()) continue;
    const Review* x = first[0];
    const Review* y = first[1];
    slot_a.push_back(x->label);
    slot_b.push_back(y->label);
    if (y->annotator_id < x->annotator_id) std::swap(x, y);
    auto& bucket = pairs[{x->annotator_id, y->annotator_id}];
    bucket.first.push_back(x->label);
    bucket.second.push_back(y->label);
    if (first[0]->label != first[1]->label && !impl_->third_review(a.record_id))
      ++summary.unresolved_disagreements;
  }
  for (const auto& [who, labels] : pairs) {
    try {
      AgreementReport r = cohen_kappa(labels.first, labels.second, gate);
      r.annotator_a = who.first;
      r.annotator_b = who.second;
      summary.pairs.push_back(std::move(r));
    } catch (const Error& e) {
      if (e.code() != Errc::undefined_kappa) throw;
      summary.undefined_pairs.push_back(UndefinedPair{who.first, who.second, labels.first.size(), 1.0});
    }
  }
  if (!slot_a.empty()) {
    try {
      AgreementReport r = cohen_kappa(slot_a, slot_b, gate);
      r.annotator_a = "*";
      r.annotator_b = "*";
      summary.pooled = r;
    } catch (const Error& e) {
      if (e.code() != Errc::undefined_kappa) throw;
    }
  }
  return summary;
}

void LabelingStore::add_suggestion(const LabelSuggestion& suggestion) {
  std::unique_lock lock(impl_->mu);
  impl_->suggestions[suggestion.record_id] = suggestion;
  impl_->log({{"type", "suggestion"}, {"suggestion", to_json(suggestion)}});
}

std::optional<LabelSuggestion> LabelingStore::suggestion(const std::string& record_id) const {
  std::shared_lock lock(impl_->mu);
  auto it = impl_->suggestions.find(record_id);
  if (it == impl_->suggestions.end()) return std::nullopt;
  return it->second;
}

std::vector<LabelSuggestion> LabelingStore::suggestions() const {
  std::shared_lock lock(impl_->mu);
  std::vector<LabelSuggestion> out;
  for (const auto& [id, s] : impl_->suggestions) out.push_back(s);
  return out;
}

void LabelingStore::set_suggestions_visible(bool visible) {
  std::unique_lock lock(impl_->mu);
  impl_->suggestions_visible = visible;
  impl_->log({{"type", "visibility"}, {"visible", visible}});
}

bool LabelingStore::suggestions_visible() const {
  std::shared_lock lock(impl_->mu);
  return impl_->suggestions_visible;
}

// ---------------------------------------------------------------------------

ScriptedReviewStats apply_scripted_reviews(LabelingStore& store, const std::filesystem::path& path,
                                           Timestamp at) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open scripted reviews " + path.string());
  std::map<std::pair<std::string, std::string>, std::string> first_round;
  for (const auto& a : store.assignments())
    if (a.round == 1) first_round[{a.record_id, a.annotator_id}] = a.id;

  ScriptedReviewStats stats;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw Error(Errc::parse, path.string() + ": malformed line " + std::to_string(line_no));
    std::string rec = j.at("record_id").get<std::string>();
    std::string who = j.at("annotator_id").get<std::string>();
    Label label = label_from_int(j.at("label").get<long long>());
    std::optional<std::string> note;
    if (j.contains("note") && j["note"].is_string()) note = j["note"].get<std::string>();
    ReviewOutcome outcome;
    bool third = false;
    if (auto it = first_round.find({rec, who}); it != first_round.end()) {
      outcome = store.record_review(it->second, label, note, at);
    } else {
      outcome = store.record_third_review(rec, who, label, note, at);
      third = true;
    }
    if (!outcome.created) ++stats.duplicates;
    else if (third) ++stats.third_round;
    else ++stats.first_round;
  }
  return stats;
}

std::vector<std::size_t> qc_sample_indices(std::size_t n, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw Error(Errc::input, "sampling rate must be in (0, 1]");
  if (n == 0) throw Error(Errc::input, "nothing to sample from");
  // The small slack keeps e.g. 0.07 * 100 from rounding up to 8.
  auto k = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_below(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<LabeledItem> qc_sample(std::span<const LabeledItem> labeled, double rate, std::uint64_t seed) {
  std::vector<LabeledItem> out;
  for (std::size_t i : qc_sample_indices(labeled.size(), rate, seed)) out.push_back(labeled[i]);
  return out;
}

ExportResult export_labeled_corpus(const Corpus& corpus, std::span<const AdjudicatedLabel> adjudications,
                                   const AgreementSummary& agreement, const ExportOptions& options) {
  auto failures = gate_failures(agreement, options.gate);
  if (!failures.empty())
    throw IdListError(Errc::gate_failed, "export refused: inter-annotator agreement below gate", failures);

  std::map<std::string, const AdjudicatedLabel*> by_id;
  for (const auto& a : adjudications) by_id[a.record_id] = &a;

  ExportResult result;
  for (const auto& rec : corpus) {
    auto it = by_id.find(rec.id);
    if (it == by_id.end() || !it->second->resolved() || !it->second->final_label) {
      result.skipped.push_back(rec.id);
      continue;
    }
    ConsolidatedRecord out = rec;
    out.label = *it->second->final_label;
    result.records.push_back(std::move(out));
  }
  if (options.strict && !result.skipped.empty())
    throw IdListError(Errc::export_blocked, "export blocked: unresolved records", result.skipped);
  return result;
}

}  // namespace newshub::labeling
