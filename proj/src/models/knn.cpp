#include "newshub/models/knn.hpp"

#include <algorithm>
#include <numeric>

#include "common.hpp"
#include "newshub/error.hpp"

namespace newshub::models {

using nlohmann::json;

namespace {

// Squared distance by merging the two sorted sparse rows.
double squared_distance(CsrMatrix::Row p, CsrMatrix::Row q) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < p.size() || j < q.size()) {
    double d;
    if (j == q.size() || (i < p.size() && p.indices[i] < q.indices[j])) {
      d = p.values[i++];
    } else if (i == p.size() || q.indices[j] < p.indices[i]) {
      d = q.values[j++];
    } else {
      d = p.values[i++] - q.values[j++];
    }
    s += d * d;
  }
  return s;
}

}  // namespace

KnnModel train_knn(const CsrMatrix& x, std::span<const Label> y, std::size_t k) {
  detail::check_training_input(x, y, false);
  if (k == 0) throw Error(Errc::input, "k must be positive");
  if (k > x.rows)
    throw Error(Errc::input, "k = " + std::to_string(k) + " exceeds the " + std::to_string(x.rows) +
                                 " training rows");
  KnnModel m;
  m.k = k;
  m.train = x;
  m.labels.assign(y.begin(), y.end());
  return m;
}

std::vector<std::size_t> KnnModel::neighbors(CsrMatrix::Row row) const {
  std::vector<std::pair<double, std::size_t>> d(train.rows);
  for (std::size_t i = 0; i < train.rows; ++i) d[i] = {squared_distance(row, train.row(i)), i};
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

Label KnnModel::predict_row(CsrMatrix::Row row) const {
  std::size_t fake = 0;
  for (std::size_t i : neighbors(row)) fake += labels[i] == Label::fake;
  return 2 * fake > k ? Label::fake : Label::real;
}

json to_json(const KnnModel& m) {
  json jrows = json::array();
  for (std::size_t r = 0; r < m.train.rows; ++r) {
    auto row = m.train.row(r);
    jrows.push_back({{"indices", std::vector<std::uint32_t>(row.indices.begin(), row.indices.end())},
                     {"values", std::vector<double>(row.values.begin(), row.values.end())}});
  }
  return {{"k", m.k}, {"n_features", m.train.cols}, {"rows", jrows}, {"labels", labels_to_ints(m.labels)}};
}

KnnModel knn_from_json(const json& j) {
  KnnModel m;
  m.k = j.at("k").get<std::size_t>();
  m.train.cols = j.at("n_features").get<std::size_t>();
  for (const auto& r : j.at("rows")) {
    auto idx = r.at("indices").get<std::vector<std::uint32_t>>();
    auto val = r.at("values").get<std::vector<double>>();
    if (idx.size() != val.size()) throw Error(Errc::input, "malformed neighbour row");
    std::vector<std::pair<std::uint32_t, double>> e;
    for (std::size_t i = 0; i < idx.size(); ++i) e.emplace_back(idx[i], val[i]);
    m.train.push_row(std::move(e));
  }
  m.labels = labels_from_ints(j.at("labels").get<std::vector<int>>());
  if (m.labels.size() != m.train.rows || m.k == 0 || m.k > m.train.rows)
    throw Error(Errc::input, "malformed k-NN model");
  return m;
}

}  // namespace newshub::models
