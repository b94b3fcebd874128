#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "newshub/error.hpp"
#include "newshub/eval/metrics.hpp"
#include "newshub/ingest/ingest.hpp"
#include "newshub/labeling/llm.hpp"
#include "newshub/labeling/workflow.hpp"
#include "newshub/log.hpp"
#include "newshub/models/model.hpp"
#include "newshub/pipeline/pipeline.hpp"
#include "newshub/record.hpp"
#include "newshub/service/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace newshub;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  open_out(path) << text;
}

Timestamp timestamp_arg(const std::string& s, const char* what) {
  auto t = parse_timestamp(s);
  if (!t) throw Error(Errc::input, std::string("bad ") + what + " timestamp '" + s + "'");
  return *t;
}

fs::path store_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("NEWSHUB_STORE"); env && *env) return env;
  return ".";
}

labeling::LabelingStore open_store(const fs::path& dir) {
  fs::create_directories(dir);
  return labeling::LabelingStore::open(dir / "journal.jsonl");
}

// Parses key=value overrides; values are JSON when they parse, else strings.
json parse_overrides(const std::vector<std::string>& items) {
  json out = json::object();
  for (const auto& kv : items) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(Errc::input, "expected key=value, got '" + kv + "'");
    const std::string value = kv.substr(eq + 1);
    json v = json::parse(value, nullptr, false);
    out[kv.substr(0, eq)] = v.is_discarded() ? json(value) : v;
  }
  return out;
}

std::unique_ptr<labeling::CompletionClient> make_client(const std::string& stub) {
  if (!stub.empty())
    return std::make_unique<labeling::StubCompletionClient>(labeling::StubCompletionClient::from_file(stub));
  return std::make_unique<labeling::HttpCompletionClient>(labeling::LlmEndpoint::from_env());
}

std::vector<models::ModelKind> parse_models(const std::vector<std::string>& names) {
  if (names.empty()) return models::all_model_kinds();
  std::vector<models::ModelKind> out;
  for (const auto& n : names) out.push_back(models::model_kind_from_string(n));
  return out;
}

// --- ingest ----------------------------------------------------------------

struct IngestArgs {
  std::string feeds, window_start, window_end, benchmark, out, csv;
  std::optional<std::size_t> limit, max_sentences;
  bool offline = false;
  int timeout_ms = 30000;
};

int cmd_ingest(const IngestArgs& a) {
  auto cfg = ingest::load_ingest_config(a.feeds);
  if (!a.window_start.empty()) cfg.window_start = timestamp_arg(a.window_start, "window start");
  if (!a.window_end.empty()) cfg.window_end = timestamp_arg(a.window_end, "window end");
  if (a.limit) cfg.benchmark_limit = *a.limit;
  if (a.max_sentences) cfg.max_sentences = *a.max_sentences;
  Corpus benchmark;
  if (!a.benchmark.empty()) benchmark = read_corpus_jsonl(a.benchmark);

  pipeline::IngestRun run;
  const std::chrono::milliseconds timeout(a.timeout_ms);
  if (a.offline) {
    auto transport = pipeline::fixture_transport(cfg);
    run = pipeline::run_ingest(cfg, benchmark, transport, timeout);
  } else {
    ingest::HttpTransport transport;
    run = pipeline::run_ingest(cfg, benchmark, transport, timeout);
  }
  write_corpus_jsonl(a.out, run.corpus);
  if (!a.csv.empty()) {
    auto os = open_out(a.csv);
    write_corpus_csv(os, run.corpus);
  }
  std::size_t failed = 0;
  for (const auto& f : run.feeds) failed += f.error ? 1 : 0;
  std::fprintf(stderr, "ingest: %zu records (%zu feed entries, %zu without body, %zu undated, %zu feed(s) failed)\n",
               run.corpus.size(), run.stats.entries, run.stats.skipped_no_body, run.stats.missing_date, failed);
  return 0;
}

// --- label -----------------------------------------------------------------

struct LabelArgs {
  std::string store, corpus, out, stub, prompt, annotators, script, csv;
  std::uint64_t seed = 7;
  bool strict = false;
  bool json_output = false;
};

int cmd_suggest(const LabelArgs& a) {
  const Corpus corpus = read_corpus_jsonl(a.corpus);
  auto client = make_client(a.stub);
  const std::string tmpl = a.prompt.empty() ? std::string(labeling::default_prompt_template()) : read_file(a.prompt);
  std::optional<labeling::LabelingStore> store;
  std::set<std::string> skip;
  if (!a.store.empty()) {
    store = open_store(a.store);
    for (const auto& s : store->suggestions()) skip.insert(s.record_id);
  }
  auto run = pipeline::suggest_corpus(corpus, *client, tmpl, skip);
  auto os = open_out(a.out);
  for (const auto& s : run.suggestions) {
    os << labeling::to_json(s).dump() << '\n';
    if (store) store->add_suggestion(s);
  }
  std::fprintf(stderr, "suggest: %zu suggestions, %zu failed\n", run.suggestions.size(), run.failures.size());
  return run.failures.empty() ? 0 : 3;
}

int cmd_assign(const LabelArgs& a) {
  auto store = open_store(store_dir(a.store));
  for (const auto& ann : labeling::load_annotators(a.annotators))
    if (!store.annotator(ann.id)) store.add_annotator(ann);
  std::set<std::string> assigned;
  for (const auto& x : store.assignments()) assigned.insert(x.record_id);
  std::vector<std::string> todo;
  for (const auto& r : read_corpus_jsonl(a.corpus))
    if (!assigned.count(r.id)) todo.push_back(r.id);
  const auto annotators = store.annotators();
  auto batch = labeling::assign_reviews(todo, annotators, a.seed);
  store.add_assignments(batch);
  if (!a.out.empty()) {
    auto os = open_out(a.out);
    for (const auto& x : batch) os << labeling::to_json(x).dump() << '\n';
  }
  std::fprintf(stderr, "assign: %zu assignments over %zu records\n", batch.size(), todo.size());
  return 0;
}

int cmd_review(const LabelArgs& a) {
  auto store = open_store(store_dir(a.store));
  auto stats = labeling::apply_scripted_reviews(store, a.script, now_utc());
  std::fprintf(stderr, "review: %zu first-round, %zu tie-break, %zu repeated\n", stats.first_round,
               stats.third_round, stats.duplicates);
  return 0;
}

int cmd_kappa(const LabelArgs& a) {
  auto store = open_store(store_dir(a.store));
  const auto summary = store.agreement();
  const auto failures = labeling::gate_failures(summary, {});
  if (a.json_output) {
    json j = labeling::to_json(summary);
    j["gate_failures"] = failures;
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("%-24s %-24s %6s %8s %s\n", "annotator_a", "annotator_b", "items", "kappa", "gate");
    for (const auto& p : summary.pairs)
      std::printf("%-24s %-24s %6zu %8.4f %s\n", p.annotator_a.c_str(), p.annotator_b.c_str(), p.n_items, p.kappa,
                  p.passes_gate ? "pass" : "fail");
    for (const auto& u : summary.undefined_pairs)
      std::printf("%-24s %-24s %6zu %8s undefined\n", u.annotator_a.c_str(), u.annotator_b.c_str(), u.n_items, "-");
    if (summary.pooled) std::printf("pooled kappa %.4f over %zu items\n", summary.pooled->kappa, summary.pooled->n_items);
    std::printf("unresolved disagreements: %zu\n", summary.unresolved_disagreements);
  }
  return failures.empty() ? 0 : 4;
}

int cmd_export(const LabelArgs& a) {
  auto store = open_store(store_dir(a.store));
  const Corpus corpus = read_corpus_jsonl(a.corpus);
  const auto adjudications = store.adjudications();
  labeling::ExportOptions opts;
  opts.strict = a.strict;
  auto result = labeling::export_labeled_corpus(corpus, adjudications, store.agreement(), opts);
  write_corpus_jsonl(a.out, result.records);
  if (!a.csv.empty()) {
    auto os = open_out(a.csv);
    write_corpus_csv(os, result.records);
  }
  std::fprintf(stderr, "export: %zu labeled records, %zu unresolved skipped\n", result.records.size(),
               result.skipped.size());
  return 0;
}

// --- models ----------------------------------------------------------------

struct SplitArgs {
  std::string corpus, train_out, test_out;
  std::uint64_t seed = 7;
  double train_fraction = 0.8;
  bool no_stratify = false;
};

int cmd_split(const SplitArgs& a) {
  const Corpus corpus = read_corpus_jsonl(a.corpus);
  std::vector<Label> labels;
  for (const auto& r : corpus) {
    if (!r.label) throw Error(Errc::input, "record " + r.id + " is unlabeled");
    labels.push_back(*r.label);
  }
  auto s = features::split(labels, {a.train_fraction, a.seed, !a.no_stratify});
  Corpus train, test;
  for (auto i : s.train) train.push_back(corpus[i]);
  for (auto i : s.test) test.push_back(corpus[i]);
  write_corpus_jsonl(a.train_out, train);
  write_corpus_jsonl(a.test_out, test);
  std::fprintf(stderr, "split: %zu train, %zu test\n", train.size(), test.size());
  return 0;
}

struct TrainArgs {
  std::string model, corpus, out;
  std::uint64_t seed = 7;
  std::vector<std::string> overrides;
  std::size_t min_df = 2;
  bool no_upsample = false;
};

int cmd_train(const TrainArgs& a) {
  auto params = models::Hyperparameters::defaults(models::model_kind_from_string(a.model), a.seed);
  json over = parse_overrides(a.overrides);
  for (auto it = over.begin(); it != over.end(); ++it) params.set(it.key(), it.value());
  pipeline::TrainOptions opts;
  opts.min_df = a.min_df;
  opts.upsample = !a.no_upsample;
  auto model = pipeline::train_on_corpus(read_corpus_jsonl(a.corpus), params, opts);
  models::save_model(model, a.out);
  std::fprintf(stderr, "train: %s on %zu rows, %zu features\n", a.model.c_str(), model.n_train, model.n_features);
  return 0;
}

struct PredictArgs {
  std::string model, corpus, out, name;
};

int cmd_predict(const PredictArgs& a) {
  auto model = models::load_model(a.model);
  auto preds = pipeline::predict_corpus(model, read_corpus_jsonl(a.corpus));
  const std::string name = a.name.empty() ? models::display_name(model.kind()) : a.name;
  if (a.out.empty() || a.out == "-") {
    models::write_predictions(std::cout, name, preds);
  } else {
    auto os = open_out(a.out);
    models::write_predictions(os, name, preds);
  }
  return 0;
}

struct EvaluateArgs {
  std::string truth, format = "markdown", out, title;
  std::vector<std::string> preds;
  bool lenient = false;
  bool three_columns = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const Corpus truth_corpus = read_corpus_jsonl(a.truth);
  std::map<std::string, Label> truth;
  std::set<std::string> ids;
  for (const auto& r : truth_corpus) {
    if (!r.label) continue;
    truth[r.id] = *r.label;
    ids.insert(r.id);
  }
  std::vector<eval::MetricsReport> reports;
  for (const auto& path : a.preds) {
    auto ext = models::import_external_predictions(fs::path(path), &ids, !a.lenient);
    if (!ext.unmatched.empty())
      log_warn(ext.model_name + ": " + std::to_string(ext.unmatched.size()) + " prediction(s) for unknown records");
    std::vector<Label> t, p;
    for (const auto& pr : ext.predictions) {
      auto it = truth.find(pr.record_id);
      if (it == truth.end()) continue;
      t.push_back(it->second);
      p.push_back(pr.label);
    }
    reports.push_back(eval::metrics(eval::confusion(t, p), ext.model_name));
  }
  eval::RenderOptions ro;
  ro.include_tn = !a.three_columns;
  if (!a.title.empty()) ro.title = a.title;
  write_text(a.out, eval::render_report(eval::leaderboard(std::move(reports)), eval::report_format_from_string(a.format), ro));
  return 0;
}

struct BenchArgs {
  std::string corpus, format = "markdown", out, json_out;
  std::vector<std::string> models, external, overrides;
  std::uint64_t seed = 7;
  std::size_t min_df = 2;
  bool synthetic = false;
  bool no_upsample = false;
};

int cmd_bench(const BenchArgs& a) {
  Corpus corpus;
  if (a.synthetic) corpus = pipeline::make_synthetic_corpus({});
  else if (!a.corpus.empty()) corpus = read_corpus_jsonl(a.corpus);
  else throw Error(Errc::input, "bench needs --corpus or --synthetic");
  pipeline::BenchmarkOptions opts;
  opts.split.seed = a.seed;
  opts.min_df = a.min_df;
  opts.upsample = !a.no_upsample;
  opts.models = parse_models(a.models);
  for (const auto& item : a.overrides) {
    // model:key=value
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw Error(Errc::input, "expected model:key=value, got '" + item + "'");
    const auto kind = models::model_kind_from_string(item.substr(0, colon));
    opts.overrides[kind].update(parse_overrides({item.substr(colon + 1)}));
  }
  for (const auto& path : a.external) opts.external.push_back(models::import_external_predictions(fs::path(path)));
  auto result = pipeline::run_benchmark(corpus, opts);
  if (!a.json_out.empty()) open_out(a.json_out) << pipeline::benchmark_json(result, opts).dump(2) << '\n';
  write_text(a.out, eval::render_report(result.board, eval::report_format_from_string(a.format)));
  return 0;
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string config, store, ui_dir, host, admin_token, llm_stub;
  std::optional<int> port;
  std::optional<std::size_t> workers;
};

int cmd_serve(const ServeArgs& a) {
  service::ServiceConfig cfg;
  if (!a.config.empty()) cfg = service::load_service_config(a.config);
  service::apply_env_overrides(cfg);
  if (!a.store.empty()) cfg.store_dir = a.store;
  if (!a.ui_dir.empty()) cfg.ui_dir = fs::path(a.ui_dir);
  if (!a.host.empty()) cfg.host = a.host;
  if (!a.admin_token.empty()) cfg.admin_token = a.admin_token;
  if (!a.llm_stub.empty()) cfg.llm_stub = fs::path(a.llm_stub);
  if (a.port) cfg.port = *a.port;
  if (a.workers) cfg.workers = *a.workers;

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  service::Service svc(cfg);
  const int port = svc.start();
  std::fprintf(stderr, "serving on http://%s:%d\n", cfg.host.c_str(), port);
  int sig = 0;
  sigwait(&set, &sig);
  std::fprintf(stderr, "shutting down\n");
  svc.stop();
  return 0;
}

int report_error(const Error& e) {
  std::fprintf(stderr, "newshub: %s error: %s\n", to_string(e.code()), e.what());
  if (auto* ids = dynamic_cast<const IdListError*>(&e)) {
    std::size_t shown = 0;
    for (const auto& id : ids->ids()) {
      if (++shown > 20) {
        std::fprintf(stderr, "  ... %zu more\n", ids->ids().size() - 20);
        break;
      }
      std::fprintf(stderr, "  %s\n", id.c_str());
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"newshub: corpus ingestion, labeling, model hub and evaluation"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Fetch feeds and consolidate with a benchmark corpus");
  ingest->add_option("--feeds", ia.feeds, "Feed and keyword-group config file")->required();
  ingest->add_option("--window-start", ia.window_start, "Inclusive start of the collection window");
  ingest->add_option("--window-end", ia.window_end, "Inclusive end of the collection window");
  ingest->add_option("--benchmark", ia.benchmark, "Benchmark corpus (JSON-Lines)");
  ingest->add_option("--limit", ia.limit, "Benchmark records kept, earliest first");
  ingest->add_option("--max-sentences", ia.max_sentences, "Sentences per snippet");
  ingest->add_option("--out", ia.out, "Output corpus (JSON-Lines)")->required();
  ingest->add_option("--csv", ia.csv, "Also write Dataset,Text,Label CSV");
  ingest->add_flag("--offline", ia.offline, "Read feed fixtures instead of the network");
  ingest->add_option("--timeout-ms", ia.timeout_ms, "Per-feed fetch timeout");

  LabelArgs la;
  auto* label = app.add_subcommand("label", "Labeling workflow");
  label->require_subcommand(1);
  auto* suggest = label->add_subcommand("suggest", "LLM label suggestions");
  suggest->add_option("--corpus", la.corpus)->required();
  suggest->add_option("--out", la.out)->required();
  suggest->add_option("--stub", la.stub, "Canned responses file instead of the live endpoint");
  suggest->add_option("--prompt", la.prompt, "Prompt template file");
  suggest->add_option("--store", la.store, "Also record suggestions in this store");
  auto* assign = label->add_subcommand("assign", "Assign two reviewers per record");
  assign->add_option("--corpus", la.corpus)->required();
  assign->add_option("--annotators", la.annotators)->required();
  assign->add_option("--seed", la.seed);
  assign->add_option("--store", la.store, "Store directory (default $NEWSHUB_STORE or .)");
  assign->add_option("--out", la.out, "Write the new assignments here");
  auto* review = label->add_subcommand("review", "Apply a scripted reviews file");
  review->add_option("--script", la.script)->required();
  review->add_option("--store", la.store);
  auto* kappa = label->add_subcommand("kappa", "Inter-annotator agreement");
  kappa->add_option("--store", la.store);
  kappa->add_flag("--json", la.json_output);
  auto* exp = label->add_subcommand("export", "Write the adjudicated corpus");
  exp->add_option("--corpus", la.corpus)->required();
  exp->add_option("--out", la.out)->required();
  exp->add_option("--csv", la.csv);
  exp->add_option("--store", la.store);
  exp->add_flag("--strict", la.strict, "Fail when any record is unresolved");

  SplitArgs sa;
  auto* split = app.add_subcommand("split", "Stratified train/test split");
  split->add_option("--corpus", sa.corpus)->required();
  split->add_option("--seed", sa.seed);
  split->add_option("--train-fraction", sa.train_fraction);
  split->add_flag("--no-stratify", sa.no_stratify);
  split->add_option("--train-out", sa.train_out)->required();
  split->add_option("--test-out", sa.test_out)->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train one model on a labeled corpus");
  train->add_option("--model", ta.model, "Model kind")->required();
  train->add_option("--corpus", ta.corpus)->required();
  train->add_option("--seed", ta.seed);
  train->add_option("--out", ta.out)->required();
  train->add_option("--set", ta.overrides, "Hyperparameter override key=value");
  train->add_option("--min-df", ta.min_df);
  train->add_flag("--no-upsample", ta.no_upsample);

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Score a corpus with a trained model");
  predict->add_option("--model", pa.model)->required();
  predict->add_option("--corpus", pa.corpus)->required();
  predict->add_option("--out", pa.out);
  predict->add_option("--name", pa.name, "Model name written to the header line");

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Score prediction files against a labeled corpus");
  evaluate->add_option("--truth", ea.truth)->required();
  evaluate->add_option("--preds", ea.preds)->required();
  evaluate->add_option("--format", ea.format, "markdown, csv or json");
  evaluate->add_option("--out", ea.out);
  evaluate->add_option("--title", ea.title);
  evaluate->add_flag("--lenient", ea.lenient, "Ignore predictions for unknown records");
  evaluate->add_flag("--three-columns", ea.three_columns, "Confusion table without TN% and N");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Split, train every model and render the leaderboard");
  bench->add_option("--corpus", ba.corpus);
  bench->add_flag("--synthetic", ba.synthetic, "Use the built-in planted-signal corpus");
  bench->add_option("--seed", ba.seed);
  bench->add_option("--models", ba.models);
  bench->add_option("--set", ba.overrides, "Override model:key=value");
  bench->add_option("--external", ba.external, "External predictions file");
  bench->add_option("--min-df", ba.min_df);
  bench->add_flag("--no-upsample", ba.no_upsample);
  bench->add_option("--format", ba.format);
  bench->add_option("--out", ba.out);
  bench->add_option("--json-out", ba.json_out);

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--config", va.config);
  serve->add_option("--store", va.store);
  serve->add_option("--port", va.port);
  serve->add_option("--host", va.host);
  serve->add_option("--ui-dir", va.ui_dir);
  serve->add_option("--admin-token", va.admin_token);
  serve->add_option("--llm-stub", va.llm_stub);
  serve->add_option("--workers", va.workers);

  CLI11_PARSE(app, argc, argv);
  if (verbose) set_log_level(LogLevel::info);

  try {
    if (*ingest) return cmd_ingest(ia);
    if (*suggest) return cmd_suggest(la);
    if (*assign) return cmd_assign(la);
    if (*review) return cmd_review(la);
    if (*kappa) return cmd_kappa(la);
    if (*exp) return cmd_export(la);
    if (*split) return cmd_split(sa);
    if (*train) return cmd_train(ta);
    if (*predict) return cmd_predict(pa);
    if (*evaluate) return cmd_evaluate(ea);
    if (*bench) return cmd_bench(ba);
    if (*serve) return cmd_serve(va);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "newshub: %s\n", e.what());
    return 1;
  }
  return 0;
}
