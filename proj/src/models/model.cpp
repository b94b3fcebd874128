#include "newshub/models/model.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "newshub/error.hpp"

namespace newshub::models {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "newshub-model";

Learner fit(const Hyperparameters& p, const FeatureSet& fs, std::span<const Label> y) {
  const auto& x = input_for(p.kind(), fs);
  switch (p.kind()) {
    case ModelKind::multinomial_nb:
      return train_naive_bayes(x, y, NbVariant::multinomial, p.number("alpha"), p.flag("fit_prior"));
    case ModelKind::bernoulli_nb:
      return train_naive_bayes(x, y, NbVariant::bernoulli, p.number("alpha"), p.flag("fit_prior"));
    case ModelKind::logistic_regression: {
      LogisticOptions o;
      o.c = p.number("C");
      o.max_iter = p.count("max_iter");
      o.tol = p.number("tol");
      return train_logistic(x, y, o);
    }
    case ModelKind::sgd_hinge:
    case ModelKind::linear_svc: {
      SgdOptions o;
      o.loss = p.get("loss").get<std::string>() == "hinge" ? LinearLoss::hinge : LinearLoss::squared_hinge;
      o.c = p.number("C");
      o.learning_rate = p.number("learning_rate");
      o.epochs = p.count("epochs");
      o.shuffle = p.flag("shuffle");
      o.seed = p.seed();
      return train_sgd(x, y, o);
    }
    case ModelKind::decision_tree: {
      TreeOptions o;
      o.min_samples_split = p.count("min_samples_split");
      o.max_depth = p.optional_count("max_depth");
      const json& mf = p.get("max_features");
      if (mf.is_string()) o.max_features = sqrt_features(x.cols);
      else if (!mf.is_null()) o.max_features = mf.get<std::size_t>();
      o.seed = p.seed();
      return train_tree(x, y, o);
    }
    case ModelKind::random_forest: {
      ForestOptions o;
      o.n_estimators = p.count("n_estimators");
      o.bootstrap = p.flag("bootstrap");
      o.min_samples_split = p.count("min_samples_split");
      o.max_depth = p.optional_count("max_depth");
      const json& mf = p.get("max_features");
      if (mf.is_string()) o.max_features = sqrt_features(x.cols);
      else if (!mf.is_null()) o.max_features = mf.get<std::size_t>();
      o.seed = p.seed();
      return train_random_forest(x, y, o);
    }
    case ModelKind::adaboost: {
      AdaBoostOptions o;
      o.n_estimators = p.count("n_estimators");
      o.learning_rate = p.number("learning_rate");
      return train_adaboost(x, y, o);
    }
    case ModelKind::gradient_boosting: {
      GradientBoostingOptions o;
      o.learning_rate = p.number("learning_rate");
      o.n_estimators = p.count("n_estimators");
      o.max_depth = p.count("max_depth");
      o.min_samples_split = p.count("min_samples_split");
      return train_gradient_boosting(x, y, o);
    }
    case ModelKind::knn:
      return train_knn(x, y, p.count("n_neighbors"));
  }
  throw Error(Errc::validation, "unsupported model kind");
}

json learner_to_json(const Learner& l) {
  return std::visit([](const auto& m) { return to_json(m); }, l);
}

Learner learner_from_json(ModelKind kind, const json& j) {
  switch (kind) {
    case ModelKind::multinomial_nb:
    case ModelKind::bernoulli_nb: return naive_bayes_from_json(j);
    case ModelKind::logistic_regression:
    case ModelKind::sgd_hinge:
    case ModelKind::linear_svc: return linear_from_json(j);
    case ModelKind::decision_tree: return tree_from_json(j);
    case ModelKind::random_forest: return forest_from_json(j);
    case ModelKind::adaboost: return adaboost_from_json(j);
    case ModelKind::gradient_boosting: return gradient_boosting_from_json(j);
    case ModelKind::knn: return knn_from_json(j);
  }
  throw Error(Errc::input, "unsupported model kind");
}

}  // namespace

FeatureSet FeatureSet::select_rows(std::span<const std::size_t> rows) const {
  return {tfidf.select_rows(rows), counts.select_rows(rows), vocabulary_fingerprint};
}

FeatureSet make_feature_set(std::span<const features::TokenList> docs, const features::Vocabulary& vocab) {
  return {features::tfidf(docs, vocab), features::count_matrix(docs, vocab), vocab.fingerprint()};
}

const features::CsrMatrix& input_for(ModelKind kind, const FeatureSet& fs) {
  return kind == ModelKind::multinomial_nb ? fs.counts : fs.tfidf;
}

Label TrainedModel::predict_row(features::CsrMatrix::Row row) const {
  return std::visit([&](const auto& m) { return m.predict_row(row); }, learner);
}

TrainedModel train_model(const Hyperparameters& params, const FeatureSet& fs, std::span<const Label> y) {
  TrainedModel m{params, fs.vocabulary_fingerprint, fs.cols(), fs.rows(), fit(params, fs, y), std::nullopt};
  return m;
}

std::vector<Label> predict(const TrainedModel& model, const features::CsrMatrix& x, const std::string& fingerprint) {
  if (x.cols != model.n_features)
    throw Error(Errc::input, "feature dimension " + std::to_string(x.cols) + " does not match the model's " +
                                 std::to_string(model.n_features));
  if (!fingerprint.empty() && !model.vocabulary_fingerprint.empty() && fingerprint != model.vocabulary_fingerprint)
    throw Error(Errc::input, "vocabulary fingerprint " + fingerprint + " does not match the model's " +
                                 model.vocabulary_fingerprint);
  std::vector<Label> out;
  out.reserve(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) out.push_back(model.predict_row(x.row(r)));
  return out;
}

std::vector<Label> predict(const TrainedModel& model, const FeatureSet& fs) {
  return predict(model, input_for(model.kind(), fs), fs.vocabulary_fingerprint);
}

json to_json(const TrainedModel& model) {
  json j = {{"format", kFormatName},
            {"version", kModelFormatVersion},
            {"kind", to_string(model.kind())},
            {"hyperparameters", model.params.to_json()},
            {"vocabulary_fingerprint", model.vocabulary_fingerprint},
            {"n_features", model.n_features},
            {"n_train", model.n_train},
            {"parameters", learner_to_json(model.learner)}};
  if (model.vocabulary) j["vocabulary"] = features::to_json(*model.vocabulary);
  return j;
}

TrainedModel model_from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string()) != kFormatName)
    throw Error(Errc::input, "not a model container");
  const int version = j.value("version", 0);
  if (version != kModelFormatVersion)
    throw Error(Errc::input, "unsupported model container version " + std::to_string(version));
  try {
    Hyperparameters params = Hyperparameters::from_json(j.at("hyperparameters"));
    if (to_string(params.kind()) != j.at("kind").get<std::string>())
      throw Error(Errc::input, "model kind and hyperparameters disagree");
    TrainedModel m{params,
                   j.at("vocabulary_fingerprint").get<std::string>(),
                   j.at("n_features").get<std::size_t>(),
                   j.value("n_train", std::size_t{0}),
                   learner_from_json(params.kind(), j.at("parameters")),
                   std::nullopt};
    if (j.contains("vocabulary")) m.vocabulary = features::vocabulary_from_json(j["vocabulary"]);
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::input, std::string("malformed model container: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << to_json(model).dump() << '\n';
  if (!out) throw Error(Errc::io, "failed writing " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::parse, path.string() + " is not valid JSON");
  return model_from_json(j);
}

ExternalPredictions import_external_predictions(std::istream& in, const std::set<std::string>* known_ids,
                                                bool strict) {
  ExternalPredictions out;
  std::set<std::string> seen;
  std::vector<std::string> unknown;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw Error(Errc::parse, "predictions line " + std::to_string(line_no) + " is not a JSON object");
    if (!j.contains("record_id")) {
      if (j.contains("model_name") && j["model_name"].is_string()) {
        out.model_name = j["model_name"].get<std::string>();
        continue;
      }
      throw Error(Errc::validation, "predictions line " + std::to_string(line_no) + " lacks record_id");
    }
    std::string id = j["record_id"].is_string() ? j["record_id"].get<std::string>() : j["record_id"].dump();
    if (!j.contains("label") || !j["label"].is_number_integer())
      throw Error(Errc::validation, "predictions line " + std::to_string(line_no) + ": label must be 0 or 1");
    const auto v = j["label"].get<long long>();
    if (v != 0 && v != 1)
      throw Error(Errc::validation, "predictions line " + std::to_string(line_no) + ": label " +
                                        std::to_string(v) + " is not 0 or 1");
    if (!seen.insert(id).second)
      throw Error(Errc::validation, "duplicate prediction for record " + id);
    if (known_ids && !known_ids->count(id)) {
      unknown.push_back(id);
      continue;
    }
    out.predictions.push_back({id, v == 1 ? Label::fake : Label::real});
  }
  if (!unknown.empty()) {
    if (strict) throw IdListError(Errc::input, "predictions reference unknown record ids", unknown);
    out.unmatched = std::move(unknown);
  }
  if (out.model_name.empty()) out.model_name = "external";
  return out;
}

ExternalPredictions import_external_predictions(const std::filesystem::path& path,
                                                const std::set<std::string>* known_ids, bool strict) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open predictions file " + path.string());
  return import_external_predictions(in, known_ids, strict);
}

void write_predictions(std::ostream& out, const std::string& model_name, std::span<const Prediction> preds) {
  out << json{{"model_name", model_name}}.dump() << '\n';
  for (const auto& p : preds) out << json{{"record_id", p.record_id}, {"label", to_int(p.label)}}.dump() << '\n';
}

}  // namespace newshub::models
