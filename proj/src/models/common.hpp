#pragma once

#include <cmath>
#include <span>
#include <string>

#include "newshub/error.hpp"
#include "newshub/features/features.hpp"
#include "newshub/label.hpp"

namespace newshub::models::detail {

// Shape, finiteness and both-classes checks shared by the trainers.
inline void check_training_input(const features::CsrMatrix& x, std::span<const Label> y,
                                 bool require_both_classes = true) {
  if (x.rows != y.size())
    throw Error(Errc::input, "feature rows (" + std::to_string(x.rows) + ") and labels (" +
                                 std::to_string(y.size()) + ") differ");
  if (x.rows == 0) throw Error(Errc::input, "no training rows");
  for (double v : x.values)
    if (!std::isfinite(v)) throw Error(Errc::input, "non-finite feature value");
  if (require_both_classes) {
    bool seen[2] = {false, false};
    for (Label l : y) seen[to_int(l)] = true;
    if (!seen[0] || !seen[1]) throw Error(Errc::training, "training labels contain a single class");
  }
}

inline double dot(const features::CsrMatrix::Row& row, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) s += row.values[k] * w[row.indices[k]];
  return s;
}

}  // namespace newshub::models::detail
