#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "newshub/features/features.hpp"
#include "newshub/label.hpp"

namespace newshub::models {

using features::CsrMatrix;

struct KnnModel {
  std::size_t k = 5;
  CsrMatrix train;
  std::vector<Label> labels;

  // Indices of the k nearest training rows by Euclidean distance, nearest
  // first; equal distances go to the lower row index.
  std::vector<std::size_t> neighbors(CsrMatrix::Row row) const;
  // Majority label among the neighbours, ties to 0.
  Label predict_row(CsrMatrix::Row row) const;
};

// Errc::input when k exceeds the number of training rows.
KnnModel train_knn(const CsrMatrix& x, std::span<const Label> y, std::size_t k = 5);

nlohmann::json to_json(const KnnModel& m);
KnnModel knn_from_json(const nlohmann::json& j);

}  // namespace newshub::models
