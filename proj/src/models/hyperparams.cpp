#include "newshub/models/hyperparams.hpp"

#include <cmath>

#include "newshub/error.hpp"

namespace newshub::models {

using nlohmann::json;

namespace {

enum class Type { positive_number, count, flag, optional_count, choice, max_features };

struct Param {
  const char* key;
  Type type;
  json default_value;
  std::vector<std::string> choices = {};
};

const std::vector<Param>& schema(ModelKind kind) {
  static const std::vector<Param> nb = {
      {"alpha", Type::positive_number, 1.0},
      {"fit_prior", Type::flag, true},
  };
  static const std::vector<Param> logistic = {
      {"C", Type::positive_number, 1.0},
      {"penalty", Type::choice, "l2", {"l2"}},
      {"solver", Type::choice, "lbfgs", {"lbfgs"}},
      {"max_iter", Type::count, 1000},
      {"tol", Type::positive_number, 1e-6},
  };
  static const std::vector<Param> sgd = {
      {"loss", Type::choice, "hinge", {"hinge", "squared_hinge"}},
      {"penalty", Type::choice, "l2", {"l2"}},
      {"learning_rate", Type::positive_number, 0.01},
      {"C", Type::positive_number, 1.0},
      {"epochs", Type::count, 50},
      {"shuffle", Type::flag, true},
  };
  static const std::vector<Param> svc = {
      {"loss", Type::choice, "squared_hinge", {"hinge", "squared_hinge"}},
      {"penalty", Type::choice, "l2", {"l2"}},
      {"learning_rate", Type::positive_number, 0.01},
      {"C", Type::positive_number, 1.0},
      {"epochs", Type::count, 50},
      {"shuffle", Type::flag, true},
  };
  static const std::vector<Param> tree = {
      {"criterion", Type::choice, "gini", {"gini"}},
      {"min_samples_split", Type::count, 2},
      {"max_depth", Type::optional_count, nullptr},
      {"max_features", Type::max_features, nullptr},
  };
  static const std::vector<Param> forest = {
      {"n_estimators", Type::count, 100},
      {"criterion", Type::choice, "gini", {"gini"}},
      {"min_samples_split", Type::count, 2},
      {"max_depth", Type::optional_count, nullptr},
      {"max_features", Type::max_features, "sqrt"},
      {"bootstrap", Type::flag, true},
  };
  static const std::vector<Param> ada = {
      {"n_estimators", Type::count, 50},
      {"learning_rate", Type::positive_number, 1.0},
  };
  static const std::vector<Param> gb = {
      {"learning_rate", Type::positive_number, 0.1},
      {"n_estimators", Type::count, 100},
      {"max_depth", Type::count, 3},
      {"min_samples_split", Type::count, 2},
  };
  static const std::vector<Param> knn = {
      {"n_neighbors", Type::count, 5},
      {"metric", Type::choice, "euclidean", {"euclidean"}},
  };
  switch (kind) {
    case ModelKind::multinomial_nb:
    case ModelKind::bernoulli_nb: return nb;
    case ModelKind::logistic_regression: return logistic;
    case ModelKind::sgd_hinge: return sgd;
    case ModelKind::linear_svc: return svc;
    case ModelKind::decision_tree: return tree;
    case ModelKind::random_forest: return forest;
    case ModelKind::adaboost: return ada;
    case ModelKind::gradient_boosting: return gb;
    case ModelKind::knn: return knn;
  }
  return nb;
}

const Param* find_param(ModelKind kind, const std::string& key) {
  for (const auto& p : schema(kind))
    if (key == p.key) return &p;
  return nullptr;
}

bool is_count(const json& v) {
  return v.is_number_integer() && v.get<long long>() >= 1;
}

}  // namespace

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::multinomial_nb: return "multinomial_nb";
    case ModelKind::bernoulli_nb: return "bernoulli_nb";
    case ModelKind::logistic_regression: return "logistic_regression";
    case ModelKind::sgd_hinge: return "sgd_hinge";
    case ModelKind::linear_svc: return "linear_svc";
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::adaboost: return "adaboost";
    case ModelKind::gradient_boosting: return "gradient_boosting";
    case ModelKind::knn: return "knn";
  }
  return "unknown";
}

const char* display_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::multinomial_nb: return "Multinomial Naive Bayes";
    case ModelKind::bernoulli_nb: return "Bernoulli Naive Bayes";
    case ModelKind::logistic_regression: return "Logistic Regression";
    case ModelKind::sgd_hinge: return "SGD Classifier";
    case ModelKind::linear_svc: return "Linear SVC";
    case ModelKind::decision_tree: return "Decision Tree";
    case ModelKind::random_forest: return "Random Forest";
    case ModelKind::adaboost: return "AdaBoost";
    case ModelKind::gradient_boosting: return "Gradient Boosting";
    case ModelKind::knn: return "K-Nearest Neighbors";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : all_model_kinds())
    if (name == to_string(k)) return k;
  throw Error(Errc::validation, "unknown model kind '" + name + "'");
}

const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds = {
      ModelKind::multinomial_nb, ModelKind::bernoulli_nb,  ModelKind::logistic_regression,
      ModelKind::sgd_hinge,      ModelKind::linear_svc,    ModelKind::decision_tree,
      ModelKind::random_forest,  ModelKind::adaboost,      ModelKind::gradient_boosting,
      ModelKind::knn,
  };
  return kinds;
}

bool has_published_defaults(ModelKind kind) noexcept { return kind != ModelKind::knn; }

Hyperparameters Hyperparameters::defaults(ModelKind kind, std::uint64_t seed) {
  Hyperparameters h(kind, seed);
  for (const auto& p : schema(kind)) h.values_[p.key] = p.default_value;
  return h;
}

void Hyperparameters::validate_value(const std::string& key, const json& value) const {
  const Param* p = find_param(kind_, key);
  if (!p)
    throw Error(Errc::validation, "unknown hyperparameter '" + key + "' for " + to_string(kind_));
  auto bad = [&](const std::string& why) {
    throw Error(Errc::validation, std::string(to_string(kind_)) + "." + key + ": " + why);
  };
  switch (p->type) {
    case Type::positive_number:
      if (!value.is_number() || !std::isfinite(value.get<double>()) || value.get<double>() <= 0.0)
        bad("expected a positive number");
      break;
    case Type::count:
      if (!is_count(value)) bad("expected a positive integer");
      break;
    case Type::optional_count:
      if (!value.is_null() && !is_count(value)) bad("expected a positive integer or null");
      break;
    case Type::flag:
      if (!value.is_boolean()) bad("expected true or false");
      break;
    case Type::choice: {
      if (!value.is_string()) bad("expected a string");
      bool ok = false;
      for (const auto& c : p->choices) ok = ok || value.get<std::string>() == c;
      if (!ok) bad("unsupported value '" + value.get<std::string>() + "'");
      break;
    }
    case Type::max_features:
      if (!(value.is_null() || is_count(value) || (value.is_string() && value.get<std::string>() == "sqrt")))
        bad("expected null, \"sqrt\" or a positive integer");
      break;
  }
}

Hyperparameters& Hyperparameters::set(const std::string& key, const json& value) {
  validate_value(key, value);
  values_[key] = value;
  return *this;
}

const json& Hyperparameters::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw Error(Errc::validation, "hyperparameter '" + key + "' is not defined for " + to_string(kind_));
  return it->second;
}

double Hyperparameters::number(const std::string& key) const { return get(key).get<double>(); }
std::size_t Hyperparameters::count(const std::string& key) const { return get(key).get<std::size_t>(); }
bool Hyperparameters::flag(const std::string& key) const { return get(key).get<bool>(); }

std::optional<std::size_t> Hyperparameters::optional_count(const std::string& key) const {
  const json& v = get(key);
  if (v.is_null()) return std::nullopt;
  return v.get<std::size_t>();
}

json Hyperparameters::to_json() const {
  json values = json::object();
  for (const auto& [k, v] : values_) values[k] = v;
  return {{"kind", to_string(kind_)}, {"seed", seed_}, {"values", values}};
}

Hyperparameters Hyperparameters::from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw Error(Errc::validation, "hyperparameters need a string 'kind'");
  std::uint64_t seed = 0;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw Error(Errc::validation, "seed must be a non-negative integer");
    seed = j["seed"].get<std::uint64_t>();
  }
  Hyperparameters h = defaults(model_kind_from_string(j["kind"].get<std::string>()), seed);
  if (j.contains("values")) {
    if (!j["values"].is_object()) throw Error(Errc::validation, "'values' must be an object");
    for (auto it = j["values"].begin(); it != j["values"].end(); ++it) h.set(it.key(), it.value());
  }
  return h;
}

}  // namespace newshub::models
