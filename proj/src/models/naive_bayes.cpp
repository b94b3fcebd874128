#include "newshub/models/naive_bayes.hpp"

#include <algorithm>
#include <cmath>

#include "newshub/error.hpp"
#include "common.hpp"

namespace newshub::models {

using nlohmann::json;

NaiveBayesModel train_naive_bayes(const CsrMatrix& x, std::span<const Label> y, NbVariant variant,
                                  double alpha, bool fit_prior) {
  detail::check_training_input(x, y);
  if (!(alpha > 0.0)) throw Error(Errc::validation, "alpha must be positive");
  const std::size_t d = x.cols;
  std::array<double, 2> n_class{};
  std::array<std::vector<double>, 2> feature_count{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t r = 0; r < x.rows; ++r) {
    const int c = to_int(y[r]);
    n_class[c] += 1.0;
    auto row = x.row(r);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row.values[k] < 0.0) throw Error(Errc::input, "naive Bayes needs non-negative features");
      feature_count[c][row.indices[k]] += variant == NbVariant::bernoulli ? 1.0 : row.values[k];
    }
  }

  NaiveBayesModel m;
  m.variant = variant;
  m.alpha = alpha;
  m.fit_prior = fit_prior;
  const double n = static_cast<double>(x.rows);
  for (int c = 0; c < 2; ++c) {
    m.class_log_prior[c] = fit_prior ? std::log(n_class[c] / n) : std::log(0.5);
    auto& lp = m.feature_log_prob[c];
    lp.resize(d);
    if (variant == NbVariant::multinomial) {
      double total = 0.0;
      for (double v : feature_count[c]) total += v;
      const double denom = total + alpha * static_cast<double>(d);
      for (std::size_t t = 0; t < d; ++t) lp[t] = std::log((feature_count[c][t] + alpha) / denom);
    } else {
      auto& ln = m.feature_log_neg[c];
      ln.resize(d);
      const double denom = n_class[c] + 2.0 * alpha;
      for (std::size_t t = 0; t < d; ++t) {
        const double p = (feature_count[c][t] + alpha) / denom;
        lp[t] = std::log(p);
        ln[t] = std::log1p(-p);
      }
    }
  }
  return m;
}

std::array<double, 2> NaiveBayesModel::scores(CsrMatrix::Row row) const {
  std::array<double, 2> s = class_log_prior;
  for (int c = 0; c < 2; ++c) {
    if (variant == NbVariant::multinomial) {
      for (std::size_t k = 0; k < row.size(); ++k)
        s[c] += row.values[k] * feature_log_prob[c][row.indices[k]];
    } else {
      for (double v : feature_log_neg[c]) s[c] += v;
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row.values[k] <= 0.0) continue;
        const auto t = row.indices[k];
        s[c] += feature_log_prob[c][t] - feature_log_neg[c][t];
      }
    }
  }
  return s;
}

Label NaiveBayesModel::predict_row(CsrMatrix::Row row) const {
  auto s = scores(row);
  // Differences within rounding noise count as ties, which go to label 0.
  const double tol = 1e-9 * std::max({1.0, std::fabs(s[0]), std::fabs(s[1])});
  return s[1] > s[0] + tol ? Label::fake : Label::real;
}

json to_json(const NaiveBayesModel& m) {
  json j = {{"variant", m.variant == NbVariant::multinomial ? "multinomial" : "bernoulli"},
            {"alpha", m.alpha},
            {"fit_prior", m.fit_prior},
            {"class_log_prior", m.class_log_prior},
            {"feature_log_prob", m.feature_log_prob}};
  if (m.variant == NbVariant::bernoulli) j["feature_log_neg"] = m.feature_log_neg;
  return j;
}

NaiveBayesModel naive_bayes_from_json(const json& j) {
  NaiveBayesModel m;
  m.variant = j.at("variant").get<std::string>() == "bernoulli" ? NbVariant::bernoulli : NbVariant::multinomial;
  m.alpha = j.at("alpha").get<double>();
  m.fit_prior = j.at("fit_prior").get<bool>();
  m.class_log_prior = j.at("class_log_prior").get<std::array<double, 2>>();
  m.feature_log_prob = j.at("feature_log_prob").get<std::array<std::vector<double>, 2>>();
  if (m.variant == NbVariant::bernoulli)
    m.feature_log_neg = j.at("feature_log_neg").get<std::array<std::vector<double>, 2>>();
  if (m.feature_log_prob[0].size() != m.feature_log_prob[1].size())
    throw Error(Errc::input, "naive Bayes parameter lengths disagree");
  return m;
}

}  // namespace newshub::models
