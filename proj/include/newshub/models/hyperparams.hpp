#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace newshub::models {

enum class ModelKind {
  multinomial_nb,
  bernoulli_nb,
  logistic_regression,
  sgd_hinge,
  linear_svc,
  decision_tree,
  random_forest,
  adaboost,
  gradient_boosting,
  knn,
};

const char* to_string(ModelKind kind) noexcept;
// Errc::validation for unknown names.
ModelKind model_kind_from_string(const std::string& name);
const std::vector<ModelKind>& all_model_kinds();
// Display name used in reports, e.g. "Multinomial Naive Bayes".
const char* display_name(ModelKind kind) noexcept;
// False for kinds whose defaults are not taken from the published table.
bool has_published_defaults(ModelKind kind) noexcept;

// Named hyperparameters for one model kind. Unknown keys, wrong types and
// unsupported settings (say penalty "l1") are Errc::validation.
class Hyperparameters {
 public:
  static Hyperparameters defaults(ModelKind kind, std::uint64_t seed = 0);
  static Hyperparameters from_json(const nlohmann::json& j);

  ModelKind kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

  Hyperparameters& set(const std::string& key, const nlohmann::json& value);
  const nlohmann::json& get(const std::string& key) const;
  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  bool flag(const std::string& key) const;
  // Null means "unlimited"/"unset".
  std::optional<std::size_t> optional_count(const std::string& key) const;

  const std::map<std::string, nlohmann::json>& values() const noexcept { return values_; }
  nlohmann::json to_json() const;

 private:
  Hyperparameters(ModelKind kind, std::uint64_t seed) : kind_(kind), seed_(seed) {}
  void validate_value(const std::string& key, const nlohmann::json& value) const;

  ModelKind kind_;
  std::uint64_t seed_;
  std::map<std::string, nlohmann::json> values_;
};

}  // namespace newshub::models
