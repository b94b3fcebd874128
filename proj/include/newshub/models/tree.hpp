#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "newshub/features/features.hpp"
#include "newshub/label.hpp"

namespace newshub::models {

using features::CsrMatrix;

struct TreeNode {
  // -1 marks a leaf.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Leaf output: the class (0 or 1) or a regression value.
  double value = 0.0;
};

// Binary tree over sparse rows; samples go left when x[feature] <= threshold.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict_value(CsrMatrix::Row row) const;
  Label predict_row(CsrMatrix::Row row) const { return predict_value(row) > 0.5 ? Label::fake : Label::real; }
  std::size_t depth() const;
  std::size_t leaves() const;
};

struct TreeOptions {
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> max_depth;
  // Features sampled (from the non-constant ones) at each node; unset = all.
  std::optional<std::size_t> max_features;
  std::uint64_t seed = 0;
};

// Gini CART. Thresholds are midpoints between consecutive distinct values;
// ties in impurity decrease go to the lower feature, then lower threshold.
// Leaves predict the (weighted) majority, ties to 0. A single-class input
// gives a one-leaf tree.
DecisionTree train_tree(const CsrMatrix& x, std::span<const Label> y, const TreeOptions& opts = {});

// Same, on a multiset of rows with optional per-sample weights.
DecisionTree fit_classification_tree(const CsrMatrix& x, std::span<const Label> y,
                                     std::span<const std::size_t> rows, std::span<const double> weights,
                                     const TreeOptions& opts);

// Squared-error regression tree on targets; leaves hold sum(target)/sum(hessian).
DecisionTree fit_regression_tree(const CsrMatrix& x, std::span<const double> target,
                                 std::span<const double> hessian, const TreeOptions& opts);

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  // Majority vote, ties to 0.
  Label predict_row(CsrMatrix::Row row) const;
};

struct ForestOptions {
  std::size_t n_estimators = 100;
  bool bootstrap = true;
  // Unset = all features.
  std::optional<std::size_t> max_features;
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> max_depth;
  std::uint64_t seed = 0;
};

// floor(sqrt(d)), at least 1.
std::size_t sqrt_features(std::size_t d) noexcept;

RandomForestModel train_random_forest(const CsrMatrix& x, std::span<const Label> y, const ForestOptions& opts);

struct AdaBoostModel {
  std::vector<DecisionTree> stumps;
  std::vector<double> alphas;
  std::vector<double> errors;

  double decision(CsrMatrix::Row row) const;
  Label predict_row(CsrMatrix::Row row) const { return decision(row) > 0.0 ? Label::fake : Label::real; }
};

// learning_rate * 0.5 * ln((1 - eps) / eps); eps must lie in (0, 1).
double adaboost_stage_weight(double eps, double learning_rate);

struct AdaBoostOptions {
  std::size_t n_estimators = 50;
  double learning_rate = 1.0;
  // Sample weights after each round's normalization.
  std::function<void(std::size_t, std::span<const double>)> on_round;
};

// Depth-1 trees on reweighted data. Stops early when a round's error is
// >= 0.5 (Errc::degenerate_learner on the first round) or 0.
AdaBoostModel train_adaboost(const CsrMatrix& x, std::span<const Label> y, const AdaBoostOptions& opts = {});

struct GradientBoostingModel {
  double f0 = 0.0;
  double learning_rate = 0.1;
  std::vector<DecisionTree> trees;
  // Mean logistic loss on the training set after F0 and after each round.
  std::vector<double> train_loss;

  double decision(CsrMatrix::Row row) const;
  // 1 iff sigmoid(F) >= 0.5.
  Label predict_row(CsrMatrix::Row row) const { return decision(row) >= 0.0 ? Label::fake : Label::real; }
};

struct GradientBoostingOptions {
  double learning_rate = 0.1;
  std::size_t n_estimators = 100;
  std::size_t max_depth = 3;
  std::size_t min_samples_split = 2;
};

// ln(p / (1 - p)) for the positive rate p.
double log_odds_prior(std::span<const Label> y);

GradientBoostingModel train_gradient_boosting(const CsrMatrix& x, std::span<const Label> y,
                                              const GradientBoostingOptions& opts = {});

nlohmann::json to_json(const DecisionTree& t);
DecisionTree tree_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RandomForestModel& m);
RandomForestModel forest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AdaBoostModel& m);
AdaBoostModel adaboost_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GradientBoostingModel& m);
GradientBoostingModel gradient_boosting_from_json(const nlohmann::json& j);

}  // namespace newshub::models
