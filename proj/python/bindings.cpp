#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "newshub/error.hpp"
#include "newshub/eval/metrics.hpp"
#include "newshub/features/features.hpp"
#include "newshub/ingest/text.hpp"
#include "newshub/labeling/kappa.hpp"
#include "newshub/labeling/llm.hpp"
#include "newshub/labeling/workflow.hpp"
#include "newshub/pipeline/pipeline.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace newshub;

namespace {

// Structured values cross the boundary as JSON text; the Python package
// decodes them.
Corpus corpus_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_array()) throw Error(Errc::input, "corpus must be a JSON array of records");
  Corpus out;
  for (const auto& r : j) out.push_back(record_from_json(r));
  return out;
}

std::string corpus_to_json_text(const Corpus& corpus) {
  json j = json::array();
  for (const auto& r : corpus) j.push_back(to_json(r));
  return j.dump();
}

std::vector<Label> to_labels(const std::vector<int>& v) { return labels_from_ints(v); }

std::string run_ingest(const std::string& config_path, const std::optional<std::string>& benchmark_path, bool offline,
                   long timeout_ms) {
  const auto config = ingest::load_ingest_config(config_path);
  Corpus benchmark;
  if (benchmark_path) benchmark = read_corpus_jsonl(std::filesystem::path(*benchmark_path));
  pipeline::IngestRun run;
  if (offline) {
    auto transport = pipeline::fixture_transport(config);
    run = pipeline::run_ingest(config, benchmark, transport, std::chrono::milliseconds(timeout_ms));
  } else {
    ingest::HttpTransport transport;
    run = pipeline::run_ingest(config, benchmark, transport, std::chrono::milliseconds(timeout_ms));
  }
  json feeds = json::array();
  for (const auto& f : run.feeds)
    feeds.push_back({{"url", f.url}, {"records", f.records}, {"error", f.error ? json(*f.error) : json(nullptr)}});
  return json{{"corpus", json::parse(corpus_to_json_text(run.corpus))}, {"feeds", feeds}}.dump();
}

std::string kappa(const std::vector<int>& a, const std::vector<int>& b, double gate) {
  return labeling::to_json(labeling::cohen_kappa(to_labels(a), to_labels(b), gate)).dump();
}

std::string metrics_of(const std::vector<int>& y_true, const std::vector<int>& y_pred, const std::string& name) {
  return eval::to_json(eval::metrics(eval::confusion(y_true, y_pred), name)).dump();
}

std::vector<std::tuple<std::string, std::string, std::string>> assign(const std::vector<std::string>& record_ids,
                                                                      const std::vector<std::string>& annotator_ids,
                                                                      std::uint64_t seed) {
  std::vector<labeling::Annotator> people;
  for (const auto& id : annotator_ids) people.push_back({id, id, labeling::Role::other});
  std::vector<std::tuple<std::string, std::string, std::string>> out;
  for (const auto& a : labeling::assign_reviews(record_ids, people, seed))
    out.emplace_back(a.id, a.record_id, a.annotator_id);
  return out;
}

std::pair<std::string, std::string> benchmark(const std::string& corpus_json, std::uint64_t seed,
                                              const std::vector<std::string>& model_names,
                                              const std::vector<std::string>& external_paths,
                                              const std::string& overrides_json) {
  pipeline::BenchmarkOptions opts;
  opts.split.seed = seed;
  if (!model_names.empty()) {
    opts.models.clear();
    for (const auto& m : model_names) opts.models.push_back(models::model_kind_from_string(m));
  }
  const Corpus corpus = corpus_from_json_text(corpus_json);
  std::set<std::string> ids;
  for (const auto& r : corpus) ids.insert(r.id);
  for (const auto& p : external_paths)
    opts.external.push_back(models::import_external_predictions(std::filesystem::path(p), &ids, true));
  const json overrides = json::parse(overrides_json);
  for (auto it = overrides.begin(); it != overrides.end(); ++it)
    opts.overrides[models::model_kind_from_string(it.key())] = it.value();
  const auto result = pipeline::run_benchmark(corpus, opts);
  return {pipeline::benchmark_json(result, opts).dump(),
          eval::render_report(result.board, eval::ReportFormat::markdown)};
}

std::string synthetic(std::size_t n_documents, std::uint64_t seed) {
  pipeline::SyntheticSpec spec;
  spec.n_documents = n_documents;
  spec.seed = seed;
  return corpus_to_json_text(pipeline::make_synthetic_corpus(spec));
}

class Model {
 public:
  explicit Model(models::TrainedModel m) : model_(std::move(m)) {}

  static Model train(const std::string& kind, const std::string& corpus_json, std::uint64_t seed,
                     const std::string& hyperparameters_json, std::size_t min_df, bool upsample) {
    const json hp = {{"kind", kind}, {"seed", seed}, {"values", json::parse(hyperparameters_json)}};
    pipeline::TrainOptions opts;
    opts.min_df = min_df;
    opts.upsample = upsample;
    return Model(pipeline::train_on_corpus(corpus_from_json_text(corpus_json),
                                           models::Hyperparameters::from_json(hp), opts));
  }

  static Model load(const std::filesystem::path& path) { return Model(models::load_model(path)); }

  void save(const std::filesystem::path& path) const { models::save_model(model_, path); }

  std::vector<std::pair<std::string, int>> predict(const std::string& corpus_json) const {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& p : pipeline::predict_corpus(model_, corpus_from_json_text(corpus_json)))
      out.emplace_back(p.record_id, to_int(p.label));
    return out;
  }

  std::string kind() const { return models::to_string(model_.kind()); }
  std::size_t n_features() const { return model_.n_features; }
  std::size_t n_train() const { return model_.n_train; }

 private:
  models::TrainedModel model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core: ingestion, labeling, features, models and evaluation";

  static py::exception<Error> error(m, "NewshubError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const IdListError& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(py::str(e.what()));
      exc.attr("code") = to_string(e.code());
      exc.attr("ids") = e.ids();
      PyErr_SetObject(error.ptr(), exc.ptr());
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(py::str(e.what()));
      exc.attr("code") = to_string(e.code());
      exc.attr("ids") = py::list();
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("scrub_pii", [](const std::string& s) { return ingest::scrub_pii(s); });
  m.def("contains_pii", [](const std::string& s) { return ingest::contains_pii(s); });
  m.def("extract_snippet", [](const std::string& s, std::size_t n) { return ingest::extract_snippet(s, n); },
        py::arg("text"), py::arg("max_sentences") = 5);
  m.def("split_sentences", [](const std::string& s) { return ingest::split_sentences(s); });
  m.def("tokenize", [](const std::string& s) { return features::tokenize(s); });
  m.def("parse_verdict", [](const std::string& s) { return to_int(labeling::parse_verdict(s)); });

  m.def("ingest", &run_ingest, py::arg("config"), py::arg("benchmark") = std::nullopt, py::arg("offline") = false,
        py::arg("timeout_ms") = 30000);
  m.def("read_corpus", [](const std::filesystem::path& p) { return corpus_to_json_text(read_corpus_jsonl(p)); });
  m.def("write_corpus", [](const std::filesystem::path& p, const std::string& corpus_json) {
    write_corpus_jsonl(p, corpus_from_json_text(corpus_json));
  });
  m.def("synthetic_corpus", &synthetic, py::arg("n_documents") = 400, py::arg("seed") = 11);

  m.def("cohen_kappa", &kappa, py::arg("a"), py::arg("b"), py::arg("gate") = labeling::kKappaGate);
  m.def("assign_reviews", &assign, py::arg("record_ids"), py::arg("annotator_ids"), py::arg("seed") = 7);
  m.def("metrics", &metrics_of, py::arg("y_true"), py::arg("y_pred"), py::arg("model_name") = "model");
  m.def("benchmark", &benchmark, py::arg("corpus"), py::arg("seed") = 7,
        py::arg("models") = std::vector<std::string>{}, py::arg("external") = std::vector<std::string>{},
        py::arg("overrides") = "{}");
  m.def("model_kinds", [] {
    std::vector<std::string> out;
    for (auto k : models::all_model_kinds()) out.push_back(models::to_string(k));
    return out;
  });

  py::class_<Model>(m, "Model")
      .def_static("train", &Model::train, py::arg("kind"), py::arg("corpus"), py::arg("seed") = 7,
                  py::arg("hyperparameters") = "{}", py::arg("min_df") = 2, py::arg("upsample") = true)
      .def_static("load", &Model::load)
      .def("save", &Model::save)
      .def("predict", &Model::predict)
      .def_property_readonly("kind", &Model::kind)
      .def_property_readonly("n_features", &Model::n_features)
      .def_property_readonly("n_train", &Model::n_train);
}
