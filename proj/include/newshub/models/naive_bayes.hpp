#pragma once

#include <array>
#include <span>
#include <vector>

#include <json.hpp>

#include "newshub/features/features.hpp"
#include "newshub/label.hpp"

namespace newshub::models {

using features::CsrMatrix;

enum class NbVariant { multinomial, bernoulli };

struct NaiveBayesModel {
  NbVariant variant = NbVariant::multinomial;
  double alpha = 1.0;
  bool fit_prior = true;
  std::array<double, 2> class_log_prior{};
  // log P(term | class); bernoulli also keeps log(1 - P).
  std::array<std::vector<double>, 2> feature_log_prob;
  std::array<std::vector<double>, 2> feature_log_neg;

  std::size_t n_features() const noexcept { return feature_log_prob[0].size(); }
  // Joint log-likelihood per class for one row.
  std::array<double, 2> scores(CsrMatrix::Row row) const;
  Label predict_row(CsrMatrix::Row row) const;
};

// Multinomial consumes raw counts; bernoulli binarizes at > 0. Errc::training
// for single-class input.
NaiveBayesModel train_naive_bayes(const CsrMatrix& x, std::span<const Label> y, NbVariant variant,
                                  double alpha = 1.0, bool fit_prior = true);

nlohmann::json to_json(const NaiveBayesModel& m);
NaiveBayesModel naive_bayes_from_json(const nlohmann::json& j);

}  // namespace newshub::models
