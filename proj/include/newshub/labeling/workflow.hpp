#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newshub/labeling/kappa.hpp"
#include "newshub/labeling/types.hpp"
#include "newshub/record.hpp"

namespace newshub::labeling {

// Two first-round assignments per record to distinct annotators. Each record
// goes to the two least-loaded annotators, ties broken by a per-record seeded
// shuffle, so per-annotator counts never differ by more than one.
// Assignment ids are "<record_id>/r1a" and "<record_id>/r1b".
// Throws Error(Errc::config) with fewer than two annotators.
std::vector<Assignment> assign_reviews(std::span<const std::string> record_ids,
                                       std::span<const Annotator> annotators, std::uint64_t seed);

// Two reviews: equal labels -> agreed, else needs_adjudication. Three
// reviews: adjudicated_by_third with the majority label and the round-2
// reviewer as resolver. Reviews must come from distinct annotators
// (Error(Errc::integrity)); any other count is Error(Errc::input).
AdjudicatedLabel adjudicate(const std::string& record_id, std::span<const Review> reviews);

struct ReviewOutcome {
  Review review;
  // False when an identical submission was already stored.
  bool created = false;
};

// Serialized-write store for the review workflow. Every mutation is appended
// to an optional JSON-Lines journal; opening a journal replays it. Reads take
// a shared lock and return copies, so callers see consistent snapshots.
class LabelingStore {
 public:
  LabelingStore();
  ~LabelingStore();
  LabelingStore(LabelingStore&&) noexcept;
  LabelingStore& operator=(LabelingStore&&) noexcept;

  // Replays an existing journal (if any) and appends to it from then on.
  static LabelingStore open(const std::filesystem::path& journal);

  void add_annotator(const Annotator& annotator);
  std::vector<Annotator> annotators() const;
  std::optional<Annotator> annotator(const std::string& id) const;

  // Rejects records that already have first-round assignments and anything
  // violating "two distinct annotators per record".
  void add_assignments(std::span<const Assignment> assignments);
  std::vector<Assignment> assignments() const;
  std::optional<Assignment> assignment(const std::string& assignment_id) const;
  // Pending assignments for one annotator, oldest first.
  std::vector<Assignment> queue(const std::string& annotator_id) const;

  // Idempotent for an identical label; a different label is
  // Error(Errc::conflict) and the stored review stands.
  ReviewOutcome record_review(const std::string& assignment_id, Label label,
                              std::optional<std::string> note, Timestamp at);

  // Explicit correction of a submitted review, logged with both values.
  Review supersede(const std::string& assignment_id, Label new_label, const std::string& actor,
                   const std::string& reason, Timestamp at);
  std::vector<Supersede> supersedes() const;

  // Tie-break review on a record whose first two reviews disagree, by an
  // annotator who was not one of them. Same idempotency/conflict rules.
  ReviewOutcome record_third_review(const std::string& record_id, const std::string& annotator_id,
                                    Label label, std::optional<std::string> note, Timestamp at);

  // Disagreements the annotator may resolve (not one of the first two).
  std::vector<std::string> adjudication_cases(const std::string& annotator_id) const;

  std::vector<Review> reviews() const;
  std::vector<Review> reviews_for(const std::string& record_id) const;

  // One entry per record whose first-round reviews are both in.
  std::vector<AdjudicatedLabel> adjudications() const;
  std::optional<AdjudicatedLabel> adjudication(const std::string& record_id) const;

  AgreementSummary agreement(double gate = kKappaGate) const;

  void add_suggestion(const LabelSuggestion& suggestion);
  std::optional<LabelSuggestion> suggestion(const std::string& record_id) const;
  std::vector<LabelSuggestion> suggestions() const;

  // Whether reviewers may see LLM suggestions (per-study toggle).
  void set_suggestions_visible(bool visible);
  bool suggestions_visible() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ScriptedReviewStats {
  std::size_t first_round = 0;
  std::size_t third_round = 0;
  std::size_t duplicates = 0;
};

// Applies {"record_id", "annotator_id", "label", "note"?} lines: a matching
// pending first-round assignment gets the review, otherwise the line is
// treated as a tie-break review.
ScriptedReviewStats apply_scripted_reviews(LabelingStore& store, const std::filesystem::path& path,
                                           Timestamp at);

struct LabeledItem {
  ConsolidatedRecord record;
  AdjudicatedLabel adjudication;
};

// ceil(rate * n) items drawn uniformly without replacement, returned in
// their original order. rate outside (0, 1] or empty input ->
// Error(Errc::input).
std::vector<LabeledItem> qc_sample(std::span<const LabeledItem> labeled, double rate,
                                   std::uint64_t seed);
std::vector<std::size_t> qc_sample_indices(std::size_t n, double rate, std::uint64_t seed);

struct ExportOptions {
  bool strict = false;
  GateOptions gate;
};

struct ExportResult {
  Corpus records;
  // Unresolved record ids left out (non-strict mode only).
  std::vector<std::string> skipped;
};

// Corpus records with label = final label. Throws
// IdListError(Errc::export_blocked) listing unresolved ids in strict mode and
// IdListError(Errc::gate_failed) naming failing pairs when agreement is below
// the gate.
ExportResult export_labeled_corpus(const Corpus& corpus, std::span<const AdjudicatedLabel> adjudications,
                                   const AgreementSummary& agreement, const ExportOptions& options);

}  // namespace newshub::labeling
