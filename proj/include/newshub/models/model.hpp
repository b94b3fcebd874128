#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "newshub/features/features.hpp"
#include "newshub/label.hpp"
#include "newshub/models/hyperparams.hpp"
#include "newshub/models/knn.hpp"
#include "newshub/models/linear.hpp"
#include "newshub/models/naive_bayes.hpp"
#include "newshub/models/tree.hpp"

namespace newshub::models {

inline constexpr int kModelFormatVersion = 1;

// Both representations of the same documents: multinomial NB reads counts,
// everything else reads TF-IDF rows.
struct FeatureSet {
  features::CsrMatrix tfidf;
  features::CsrMatrix counts;
  std::string vocabulary_fingerprint;

  std::size_t rows() const noexcept { return tfidf.rows; }
  std::size_t cols() const noexcept { return tfidf.cols; }
  FeatureSet select_rows(std::span<const std::size_t> rows) const;
};

FeatureSet make_feature_set(std::span<const features::TokenList> docs, const features::Vocabulary& vocab);

// The matrix a given kind trains and predicts on.
const features::CsrMatrix& input_for(ModelKind kind, const FeatureSet& fs);

using Learner = std::variant<NaiveBayesModel, LinearModel, DecisionTree, RandomForestModel, AdaBoostModel,
                             GradientBoostingModel, KnnModel>;

struct TrainedModel {
  Hyperparameters params;
  std::string vocabulary_fingerprint;
  std::size_t n_features = 0;
  std::size_t n_train = 0;
  Learner learner;
  // Optional embedded vocabulary so a container can featurize raw text.
  std::optional<features::Vocabulary> vocabulary;

  ModelKind kind() const noexcept { return params.kind(); }
  Label predict_row(features::CsrMatrix::Row row) const;
};

TrainedModel train_model(const Hyperparameters& params, const FeatureSet& fs, std::span<const Label> y);

// Errc::input when the column count or (non-empty) fingerprint differs.
std::vector<Label> predict(const TrainedModel& model, const FeatureSet& fs);
std::vector<Label> predict(const TrainedModel& model, const features::CsrMatrix& x,
                           const std::string& fingerprint = {});

nlohmann::json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

struct Prediction {
  std::string record_id;
  Label label;
};

struct ExternalPredictions {
  std::string model_name;
  std::vector<Prediction> predictions;
  // Ids absent from the evaluation corpus (non-strict mode).
  std::vector<std::string> unmatched;
};

// JSON-Lines of {"record_id", "label"} with an optional {"model_name"} header
// line. Labels outside {0, 1} are Errc::validation; with known_ids set,
// unknown ids are IdListError(Errc::input) in strict mode and reported in
// `unmatched` otherwise.
ExternalPredictions import_external_predictions(std::istream& in,
                                                const std::set<std::string>* known_ids = nullptr,
                                                bool strict = true);
ExternalPredictions import_external_predictions(const std::filesystem::path& path,
                                                const std::set<std::string>* known_ids = nullptr,
                                                bool strict = true);

void write_predictions(std::ostream& out, const std::string& model_name, std::span<const Prediction> preds);

}  // namespace newshub::models
