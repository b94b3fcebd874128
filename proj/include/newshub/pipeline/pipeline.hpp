#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "newshub/eval/metrics.hpp"
#include "newshub/features/features.hpp"
#include "newshub/ingest/ingest.hpp"
#include "newshub/labeling/llm.hpp"
#include "newshub/models/model.hpp"
#include "newshub/record.hpp"

namespace newshub::pipeline {

struct FeedRunReport {
  std::string url;
  std::size_t records = 0;
  std::optional<std::string> error;
};

struct IngestRun {
  Corpus corpus;
  std::vector<FeedRunReport> feeds;
  ingest::IngestStats stats;
};

// Fetches and parses every configured feed (concurrently, merged in config
// order), turns entries into records and consolidates them with the
// benchmark records. A feed that fails is reported and skipped.
IngestRun run_ingest(const ingest::IngestConfig& config, const Corpus& benchmark, ingest::FeedTransport& transport,
                     std::chrono::milliseconds timeout = std::chrono::seconds(30));

// Transport serving each feed's configured fixture file.
ingest::FixtureTransport fixture_transport(const ingest::IngestConfig& config);

struct SuggestRun {
  std::vector<labeling::LabelSuggestion> suggestions;
  // record id -> last error message.
  std::map<std::string, std::string> failures;
};

// LLM suggestions for every record not in `skip`, in corpus order. Transport
// failures are retried up to `attempts` times; configuration and upstream
// errors abort the run, anything else is recorded per record.
SuggestRun suggest_corpus(const Corpus& corpus, labeling::CompletionClient& client,
                          std::string_view prompt_template, const std::set<std::string>& skip = {},
                          int attempts = 3);

struct PreparedCorpus {
  std::vector<std::string> ids;
  std::vector<features::TokenList> docs;
  std::vector<Label> labels;
  // Records whose text was blank after PII scrubbing.
  std::size_t dropped_empty = 0;
};

// Tokenized labeled records. Unlabeled records are Errc::input.
PreparedCorpus prepare_corpus(const Corpus& corpus);

struct TrainOptions {
  std::size_t min_df = 2;
  std::optional<std::size_t> max_features;
  // Random oversampling of the minority class, seeded with the model seed.
  bool upsample = true;
};

// Vocabulary, features and one model over every labeled record; the
// vocabulary is embedded in the result so it can score raw text.
models::TrainedModel train_on_corpus(const Corpus& corpus, const models::Hyperparameters& params,
                                     const TrainOptions& opts = {});

// Scores records with a model carrying an embedded vocabulary. Labels in the
// corpus are ignored. Errc::input when the model has no vocabulary.
std::vector<models::Prediction> predict_corpus(const models::TrainedModel& model, const Corpus& corpus);

struct BenchmarkOptions {
  features::SplitSpec split{0.8, 7, true};
  bool upsample = true;
  std::size_t min_df = 2;
  std::optional<std::size_t> max_features;
  std::vector<models::ModelKind> models = models::all_model_kinds();
  // Per-kind hyperparameter overrides ({"key": value}).
  std::map<models::ModelKind, nlohmann::json> overrides;
  // Scored against the corpus labels of the records they cover.
  std::vector<models::ExternalPredictions> external;
  bool keep_models = false;
};

struct BenchmarkResult {
  eval::Leaderboard board;
  features::Vocabulary vocabulary;
  features::Split split;
  std::size_t train_rows_after_upsample = 0;
  std::size_t dropped_empty = 0;
  std::vector<std::string> test_ids;
  std::vector<models::TrainedModel> models;
};

// split -> vocabulary from the train rows -> TF-IDF -> upsample -> train every
// requested kind -> evaluate on the test rows -> leaderboard.
BenchmarkResult run_benchmark(const Corpus& corpus, const BenchmarkOptions& opts = {});

// Deterministic summary: leaderboard plus split sizes and seeds.
nlohmann::json benchmark_json(const BenchmarkResult& result, const BenchmarkOptions& opts);

struct SyntheticSpec {
  std::size_t n_documents = 400;
  std::size_t n_markers = 10;
  std::size_t neutral_vocabulary = 300;
  std::size_t words_per_document = 40;
  double fake_rate = 0.4;
  // Marker occurrences per fake document, drawn uniformly from this range.
  std::size_t fake_markers_min = 4;
  std::size_t fake_markers_max = 8;
  // Chance that a real document carries a single marker.
  double real_marker_rate = 0.05;
  std::uint64_t seed = 11;
};

// Labeled corpus with a planted lexical signal: fake documents carry a few of
// the n_markers "fake-marker" terms, real documents rarely do.
Corpus make_synthetic_corpus(const SyntheticSpec& spec);
std::vector<std::string> synthetic_marker_terms(std::size_t n_markers);

}  // namespace newshub::pipeline
