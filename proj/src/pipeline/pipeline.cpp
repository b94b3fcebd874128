#include "newshub/pipeline/pipeline.hpp"

#include <future>
#include <set>
#include <thread>

#include "newshub/error.hpp"
#include "newshub/log.hpp"
#include "newshub/random.hpp"

namespace newshub::pipeline {

using nlohmann::json;

IngestRun run_ingest(const ingest::IngestConfig& config, const Corpus& benchmark, ingest::FeedTransport& transport,
                     std::chrono::milliseconds timeout) {
  ingest::validate(config);
  struct FeedOutcome {
    Corpus records;
    ingest::IngestStats stats;
    std::optional<std::string> error;
  };
  std::vector<std::future<FeedOutcome>> pending;
  for (const auto& feed : config.feeds) {
    pending.push_back(std::async(std::launch::async, [&config, &transport, feed, timeout] {
      FeedOutcome out;
      try {
        auto parsed = ingest::parse_feed(transport.get(feed.url, timeout), feed.url);
        out.records = ingest::articles_to_records(parsed.articles, feed, parsed.title, config, &out.stats);
      } catch (const Error& e) {
        out.error = e.what();
      }
      return out;
    }));
  }

  IngestRun run;
  Corpus curated;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    FeedOutcome out = pending[i].get();
    FeedRunReport rep{config.feeds[i].url, out.records.size(), out.error};
    if (out.error) log_warn("feed " + config.feeds[i].url + " skipped: " + *out.error);
    run.stats.entries += out.stats.entries;
    run.stats.skipped_no_body += out.stats.skipped_no_body;
    run.stats.skipped_bad_link += out.stats.skipped_bad_link;
    run.stats.missing_date += out.stats.missing_date;
    curated.insert(curated.end(), std::make_move_iterator(out.records.begin()),
                   std::make_move_iterator(out.records.end()));
    run.feeds.push_back(std::move(rep));
  }
  run.corpus = ingest::consolidate(curated, benchmark, config);
  return run;
}

ingest::FixtureTransport fixture_transport(const ingest::IngestConfig& config) {
  ingest::FixtureTransport t;
  for (const auto& feed : config.feeds)
    if (feed.fixture) t.add(feed.url, *feed.fixture);
  return t;
}

SuggestRun suggest_corpus(const Corpus& corpus, labeling::CompletionClient& client,
                          std::string_view prompt_template, const std::set<std::string>& skip, int attempts) {
  SuggestRun run;
  for (const auto& rec : corpus) {
    if (skip.count(rec.id)) continue;
    for (int attempt = 1;; ++attempt) {
      try {
        run.suggestions.push_back(labeling::suggest_label(rec, client, prompt_template, now_utc()));
        break;
      } catch (const Error& e) {
        if (e.code() == Errc::config || e.code() == Errc::upstream) throw;
        if (e.retriable() && attempt < attempts) {
          std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
          continue;
        }
        run.failures[rec.id] = e.what();
        log_warn("suggestion for " + rec.id + " failed: " + e.what());
        break;
      }
    }
  }
  return run;
}

PreparedCorpus prepare_corpus(const Corpus& corpus) {
  PreparedCorpus out;
  std::vector<std::string> unlabeled;
  for (const auto& rec : corpus) {
    if (!rec.label) {
      unlabeled.push_back(rec.id);
      continue;
    }
    const std::string text = ingest::scrub_pii(rec.text);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      ++out.dropped_empty;
      continue;
    }
    out.ids.push_back(rec.id);
    out.docs.push_back(features::tokenize(text));
    out.labels.push_back(*rec.label);
  }
  if (!unlabeled.empty()) throw IdListError(Errc::input, "corpus contains unlabeled records", unlabeled);
  if (out.dropped_empty)
    log_info("dropped " + std::to_string(out.dropped_empty) + " record(s) with empty text after scrubbing");
  return out;
}

models::TrainedModel train_on_corpus(const Corpus& corpus, const models::Hyperparameters& params,
                                     const TrainOptions& opts) {
  PreparedCorpus prep = prepare_corpus(corpus);
  auto vocab = features::build_vocabulary(prep.docs, opts.min_df, opts.max_features);
  const models::FeatureSet all = models::make_feature_set(prep.docs, vocab);
  std::vector<std::size_t> rows(prep.docs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  if (opts.upsample) rows = features::upsample(rows, prep.labels, params.seed());
  std::vector<Label> y;
  for (std::size_t i : rows) y.push_back(prep.labels[i]);
  auto model = models::train_model(params, all.select_rows(rows), y);
  model.vocabulary = std::move(vocab);
  return model;
}

std::vector<models::Prediction> predict_corpus(const models::TrainedModel& model, const Corpus& corpus) {
  if (!model.vocabulary) throw Error(Errc::input, "model container has no embedded vocabulary");
  std::vector<features::TokenList> docs;
  for (const auto& rec : corpus) docs.push_back(features::tokenize(ingest::scrub_pii(rec.text)));
  const auto labels = models::predict(model, models::make_feature_set(docs, *model.vocabulary));
  std::vector<models::Prediction> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) out.push_back({corpus[i].id, labels[i]});
  return out;
}

BenchmarkResult run_benchmark(const Corpus& corpus, const BenchmarkOptions& opts) {
  PreparedCorpus prep = prepare_corpus(corpus);
  BenchmarkResult result;
  result.dropped_empty = prep.dropped_empty;
  result.split = features::split(prep.labels, opts.split);

  std::vector<features::TokenList> train_docs;
  for (std::size_t i : result.split.train) train_docs.push_back(prep.docs[i]);
  result.vocabulary = features::build_vocabulary(train_docs, opts.min_df, opts.max_features);
  const models::FeatureSet all = models::make_feature_set(prep.docs, result.vocabulary);

  const std::vector<std::size_t> train_rows =
      opts.upsample ? features::upsample(result.split.train, prep.labels, opts.split.seed) : result.split.train;
  result.train_rows_after_upsample = train_rows.size();
  const models::FeatureSet train = all.select_rows(train_rows);
  const models::FeatureSet test = all.select_rows(result.split.test);
  std::vector<Label> y_train, y_test;
  for (std::size_t i : train_rows) y_train.push_back(prep.labels[i]);
  for (std::size_t i : result.split.test) {
    y_test.push_back(prep.labels[i]);
    result.test_ids.push_back(prep.ids[i]);
  }

  std::vector<eval::MetricsReport> reports;
  for (models::ModelKind kind : opts.models) {
    auto params = models::Hyperparameters::defaults(kind, opts.split.seed);
    if (auto it = opts.overrides.find(kind); it != opts.overrides.end()) {
      for (auto kv = it->second.begin(); kv != it->second.end(); ++kv) params.set(kv.key(), kv.value());
    }
    models::TrainedModel model = models::train_model(params, train, y_train);
    auto preds = models::predict(model, test);
    auto report = eval::metrics(eval::confusion(y_test, preds), models::display_name(kind));
    if (!models::has_published_defaults(kind))
      report.note = "hyperparameters not in the published table; defaults k = 5, Euclidean distance";
    reports.push_back(std::move(report));
    log_debug(std::string("trained ") + models::to_string(kind));
    if (opts.keep_models) result.models.push_back(std::move(model));
  }

  if (!opts.external.empty()) {
    std::map<std::string, Label> truth;
    for (std::size_t i = 0; i < prep.ids.size(); ++i) truth[prep.ids[i]] = prep.labels[i];
    for (const auto& ext : opts.external) {
      std::vector<Label> t, p;
      std::vector<std::string> missing;
      for (const auto& pr : ext.predictions) {
        auto it = truth.find(pr.record_id);
        if (it == truth.end()) {
          missing.push_back(pr.record_id);
          continue;
        }
        t.push_back(it->second);
        p.push_back(pr.label);
      }
      if (!missing.empty())
        throw IdListError(Errc::input, "external predictions for " + ext.model_name + " cover unknown records",
                          missing);
      reports.push_back(eval::metrics(eval::confusion(t, p), ext.model_name));
    }
  }
  result.board = eval::leaderboard(std::move(reports));
  return result;
}

json benchmark_json(const BenchmarkResult& result, const BenchmarkOptions& opts) {
  json kinds = json::array();
  for (auto k : opts.models) kinds.push_back(models::to_string(k));
  return {{"leaderboard", eval::to_json(result.board)},
          {"split",
           {{"seed", opts.split.seed},
            {"train_fraction", opts.split.train_fraction},
            {"stratified", opts.split.stratified},
            {"train", result.split.train.size()},
            {"test", result.split.test.size()},
            {"train_after_upsample", result.train_rows_after_upsample}}},
          {"vocabulary",
           {{"size", result.vocabulary.size()},
            {"min_df", opts.min_df},
            {"fingerprint", result.vocabulary.fingerprint()}}},
          {"dropped_empty", result.dropped_empty},
          {"models", kinds}};
}

namespace {

std::string letters(std::size_t i, std::size_t width) {
  std::string s(width, 'a');
  for (std::size_t k = width; k-- > 0;) {
    s[k] = static_cast<char>('a' + i % 26);
    i /= 26;
  }
  return s;
}

}  // namespace

std::vector<std::string> synthetic_marker_terms(std::size_t n_markers) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n_markers; ++i) out.push_back("marker" + letters(i, 2));
  return out;
}

Corpus make_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.fake_markers_min == 0 || spec.fake_markers_max < spec.fake_markers_min)
    throw Error(Errc::input, "fake documents need a non-empty marker count range");
  if (spec.n_markers == 0 || spec.neutral_vocabulary == 0 || spec.n_documents == 0)
    throw Error(Errc::input, "synthetic corpus needs documents, markers and a neutral vocabulary");
  const auto markers = synthetic_marker_terms(spec.n_markers);
  Rng rng = make_rng(spec.seed);
  Corpus out;
  for (std::size_t d = 0; d < spec.n_documents; ++d) {
    const bool fake = uniform_unit(rng) < spec.fake_rate;
    std::vector<std::string> words;
    for (std::size_t w = 0; w < spec.words_per_document; ++w)
      words.push_back("word" + letters(uniform_below(rng, spec.neutral_vocabulary), 3));
    const std::size_t n_mark =
        fake ? spec.fake_markers_min + uniform_below(rng, spec.fake_markers_max - spec.fake_markers_min + 1)
             : (uniform_unit(rng) < spec.real_marker_rate ? 1 : 0);
    for (std::size_t m = 0; m < n_mark; ++m) {
      const std::size_t pos = uniform_below(rng, words.size() + 1);
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), markers[uniform_below(rng, markers.size())]);
    }
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    ConsolidatedRecord rec;
    rec.id = "syn-" + std::to_string(d);
    rec.dataset = "synthetic";
    rec.text = text + ".";
    rec.label = fake ? Label::fake : Label::real;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace newshub::pipeline
