#include "newshub/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "common.hpp"
#include "newshub/error.hpp"
#include "newshub/random.hpp"

namespace newshub::models {

using nlohmann::json;

namespace {

constexpr double kGainTieTolerance = 1e-12;

enum class Mode { classification, regression };

// Classification: a = weight of class 0, b = weight of class 1.
// Regression: a = sum of targets, b = sum of hessians.
struct Stats {
  double a = 0.0;
  double b = 0.0;
  std::size_t count = 0;

  void add(const Stats& o) {
    a += o.a;
    b += o.b;
    count += o.count;
  }
  Stats minus(const Stats& o) const { return {a - o.a, b - o.b, count - o.count}; }
};

struct Item {
  double value;
  std::uint32_t slot;
};

class Builder {
 public:
  Builder(const CsrMatrix& x, Mode mode, const TreeOptions& opts)
      : x_(x), mode_(mode), opts_(opts), rng_(make_rng(opts.seed)), buckets_(x.cols) {}

  // One slot per (possibly repeated) training row.
  std::vector<std::size_t> rows;
  std::vector<double> a;  // class-0 weight or target
  std::vector<double> b;  // class-1 weight or hessian
  std::vector<double> target;

  DecisionTree build() {
    std::vector<std::uint32_t> slots(rows.size());
    std::iota(slots.begin(), slots.end(), 0u);
    slot_value_.assign(rows.size(), 0.0);
    grow(slots, 0);
    return DecisionTree{std::move(nodes_)};
  }

 private:
  Stats stats_of(std::uint32_t s) const { return {a[s], b[s], 1}; }

  // Weighted impurity times node weight (classification) or negated
  // between-group sum of squares (regression); lower is better.
  double cost(const Stats& st) const {
    if (st.count == 0) return 0.0;
    if (mode_ == Mode::classification) {
      const double w = st.a + st.b;
      return w > 0.0 ? 2.0 * st.a * st.b / w : 0.0;
    }
    return -(st.a * st.a) / static_cast<double>(st.count);
  }

  double normalizer(const Stats& st) const {
    if (mode_ == Mode::classification) return st.a + st.b;
    return static_cast<double>(st.count);
  }

  double leaf_value(const Stats& st) const {
    if (mode_ == Mode::classification) {
      const double tol = 1e-12 * std::max(1.0, st.a + st.b);
      return st.b > st.a + tol ? 1.0 : 0.0;
    }
    return st.b > 1e-12 ? st.a / st.b : 0.0;
  }

  bool pure(const std::vector<std::uint32_t>& slots, const Stats& st) const {
    if (mode_ == Mode::classification) return st.a == 0.0 || st.b == 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto s : slots) {
      lo = std::min(lo, target[s]);
      hi = std::max(hi, target[s]);
    }
    return hi - lo <= 1e-15 * std::max(1.0, std::fabs(hi));
  }

  std::int32_t leaf(const Stats& st) {
    nodes_.push_back(TreeNode{-1, 0.0, -1, -1, leaf_value(st)});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::int32_t grow(std::vector<std::uint32_t>& slots, std::size_t depth) {
    Stats total;
    for (auto s : slots) total.add(stats_of(s));
    if (slots.size() < opts_.min_samples_split || (opts_.max_depth && depth >= *opts_.max_depth) ||
        pure(slots, total))
      return leaf(total);

    // Gather the non-zero entries of the node's rows per feature.
    std::vector<std::uint32_t> touched;
    for (auto s : slots) {
      auto row = x_.row(rows[s]);
      for (std::size_t k = 0; k < row.size(); ++k) {
        auto& bucket = buckets_[row.indices[k]];
        if (bucket.empty()) touched.push_back(row.indices[k]);
        bucket.push_back({row.values[k], s});
      }
    }
    std::sort(touched.begin(), touched.end());

    std::vector<std::uint32_t> candidates;
    for (auto f : touched) {
      auto& bucket = buckets_[f];
      std::sort(bucket.begin(), bucket.end(), [](const Item& p, const Item& q) {
        return p.value != q.value ? p.value < q.value : p.slot < q.slot;
      });
      const bool has_zero = bucket.size() < slots.size();
      if (has_zero || bucket.front().value != bucket.back().value) candidates.push_back(f);
    }
    if (opts_.max_features && *opts_.max_features < candidates.size()) {
      const std::size_t k = *opts_.max_features;
      for (std::size_t i = 0; i < k; ++i)
        std::swap(candidates[i], candidates[i + uniform_below(rng_, candidates.size() - i)]);
      candidates.resize(k);
      std::sort(candidates.begin(), candidates.end());
    }

    const double parent_cost = cost(total);
    const double norm = normalizer(total);
    double best_gain = -std::numeric_limits<double>::infinity();
    std::int64_t best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, Stats>> groups;
    for (auto f : candidates) {
      const auto& bucket = buckets_[f];
      Stats nonzero;
      for (const auto& it : bucket) nonzero.add(stats_of(it.slot));
      const Stats zero = total.minus(nonzero);

      // Distinct values in ascending order with the zero block spliced in.
      groups.clear();
      bool zero_done = zero.count == 0;
      for (const auto& it : bucket) {
        if (!zero_done && it.value > 0.0) {
          groups.emplace_back(0.0, zero);
          zero_done = true;
        }
        if (!groups.empty() && groups.back().first == it.value)
          groups.back().second.add(stats_of(it.slot));
        else
          groups.emplace_back(it.value, stats_of(it.slot));
      }
      if (!zero_done) groups.emplace_back(0.0, zero);

      Stats left;
      for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        left.add(groups[g].second);
        const Stats right = total.minus(left);
        const double gain = norm > 0.0 ? (parent_cost - cost(left) - cost(right)) / norm : 0.0;
        if (gain > best_gain + kGainTieTolerance) {
          const double lo = groups[g].first, hi = groups[g + 1].first;
          double t = lo + (hi - lo) / 2.0;
          if (!(t < hi)) t = lo;
          best_gain = gain;
          best_feature = f;
          best_threshold = t;
        }
      }
    }

    if (best_feature < 0) {
      for (auto f : touched) buckets_[f].clear();
      return leaf(total);
    }
    for (auto s : slots) slot_value_[s] = 0.0;
    for (const auto& it : buckets_[static_cast<std::size_t>(best_feature)]) slot_value_[it.slot] = it.value;
    for (auto f : touched) buckets_[f].clear();

    std::vector<std::uint32_t> left_slots, right_slots;
    for (auto s : slots) (slot_value_[s] <= best_threshold ? left_slots : right_slots).push_back(s);
    slots.clear();
    slots.shrink_to_fit();

    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(TreeNode{static_cast<std::int32_t>(best_feature), best_threshold, -1, -1, 0.0});
    const std::int32_t l = grow(left_slots, depth + 1);
    const std::int32_t r = grow(right_slots, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const CsrMatrix& x_;
  Mode mode_;
  TreeOptions opts_;
  Rng rng_;
  std::vector<std::vector<Item>> buckets_;
  std::vector<double> slot_value_;
  std::vector<TreeNode> nodes_;
};

double feature_value(CsrMatrix::Row row, std::int32_t feature) {
  const auto f = static_cast<std::uint32_t>(feature);
  auto it = std::lower_bound(row.indices.begin(), row.indices.end(), f);
  if (it == row.indices.end() || *it != f) return 0.0;
  return row.values[static_cast<std::size_t>(it - row.indices.begin())];
}

double mean_log_loss(std::span<const double> f, std::span<const Label> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = (y[i] == Label::fake ? 1.0 : -1.0) * f[i];
    total += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
  }
  return total / static_cast<double>(f.size());
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double DecisionTree::predict_value(CsrMatrix::Row row) const {
  if (nodes.empty()) throw Error(Errc::input, "empty decision tree");
  std::size_t i = 0;
  for (;;) {
    const TreeNode& n = nodes[i];
    if (n.feature < 0) return n.value;
    i = static_cast<std::size_t>(feature_value(row, n.feature) <= n.threshold ? n.left : n.right);
  }
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty() && !nodes.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[i].feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return best;
}

std::size_t DecisionTree::leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

DecisionTree fit_classification_tree(const CsrMatrix& x, std::span<const Label> y,
                                     std::span<const std::size_t> rows, std::span<const double> weights,
                                     const TreeOptions& opts) {
  detail::check_training_input(x, y, false);
  if (rows.empty()) throw Error(Errc::input, "no rows to fit a tree on");
  if (!weights.empty() && weights.size() != rows.size())
    throw Error(Errc::input, "sample weights and rows differ in length");
  if (opts.min_samples_split < 2) throw Error(Errc::validation, "min_samples_split must be at least 2");
  Builder b(x, Mode::classification, opts);
  b.rows.assign(rows.begin(), rows.end());
  b.a.resize(rows.size());
  b.b.resize(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (rows[s] >= x.rows) throw Error(Errc::input, "row index out of range");
    const double w = weights.empty() ? 1.0 : weights[s];
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(Errc::input, "sample weights must be finite and >= 0");
    (y[rows[s]] == Label::fake ? b.b : b.a)[s] = w;
  }
  return b.build();
}

DecisionTree train_tree(const CsrMatrix& x, std::span<const Label> y, const TreeOptions& opts) {
  std::vector<std::size_t> rows(x.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_classification_tree(x, y, rows, {}, opts);
}

DecisionTree fit_regression_tree(const CsrMatrix& x, std::span<const double> target,
                                 std::span<const double> hessian, const TreeOptions& opts) {
  if (target.size() != x.rows || hessian.size() != x.rows)
    throw Error(Errc::input, "regression targets must match the row count");
  if (x.rows == 0) throw Error(Errc::input, "no rows to fit a tree on");
  Builder b(x, Mode::regression, opts);
  b.rows.resize(x.rows);
  std::iota(b.rows.begin(), b.rows.end(), std::size_t{0});
  b.a.assign(target.begin(), target.end());
  b.b.assign(hessian.begin(), hessian.end());
  b.target.assign(target.begin(), target.end());
  return b.build();
}

std::size_t sqrt_features(std::size_t d) noexcept {
  auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d))));
  while ((k + 1) * (k + 1) <= d) ++k;
  while (k * k > d) --k;
  return std::max<std::size_t>(k, 1);
}

Label RandomForestModel::predict_row(CsrMatrix::Row row) const {
  std::size_t votes = 0;
  for (const auto& t : trees) votes += t.predict_row(row) == Label::fake;
  return 2 * votes > trees.size() ? Label::fake : Label::real;
}

RandomForestModel train_random_forest(const CsrMatrix& x, std::span<const Label> y, const ForestOptions& opts) {
  detail::check_training_input(x, y);
  if (opts.n_estimators == 0) throw Error(Errc::validation, "n_estimators must be positive");
  Rng master = make_rng(opts.seed);
  RandomForestModel m;
  std::vector<std::size_t> rows(x.rows);
  for (std::size_t t = 0; t < opts.n_estimators; ++t) {
    TreeOptions to;
    to.min_samples_split = opts.min_samples_split;
    to.max_depth = opts.max_depth;
    to.max_features = opts.max_features;
    to.seed = opts.n_estimators == 1 && !opts.bootstrap ? opts.seed : master();
    if (opts.bootstrap) {
      for (auto& r : rows) r = uniform_below(master, x.rows);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    m.trees.push_back(fit_classification_tree(x, y, rows, {}, to));
  }
  return m;
}

double adaboost_stage_weight(double eps, double learning_rate) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::input, "stage error must lie in (0, 1)");
  return learning_rate * 0.5 * std::log((1.0 - eps) / eps);
}

double AdaBoostModel::decision(CsrMatrix::Row row) const {
  double s = 0.0;
  for (std::size_t m = 0; m < stumps.size(); ++m)
    s += alphas[m] * (stumps[m].predict_row(row) == Label::fake ? 1.0 : -1.0);
  return s;
}

AdaBoostModel train_adaboost(const CsrMatrix& x, std::span<const Label> y, const AdaBoostOptions& opts) {
  detail::check_training_input(x, y);
  if (opts.n_estimators == 0) throw Error(Errc::validation, "n_estimators must be positive");
  const std::size_t n = x.rows;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  TreeOptions stump;
  stump.max_depth = 1;

  AdaBoostModel m;
  std::vector<bool> wrong(n);
  for (std::size_t round = 0; round < opts.n_estimators; ++round) {
    DecisionTree t = fit_classification_tree(x, y, rows, w, stump);
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wrong[i] = t.predict_row(x.row(i)) != y[i];
      if (wrong[i]) eps += w[i];
    }
    if (eps >= 0.5 - 1e-12) {
      if (round == 0)
        throw Error(Errc::degenerate_learner, "first weak learner is no better than chance (error " +
                                                  std::to_string(eps) + ")");
      break;
    }
    if (eps <= 1e-12) {
      m.stumps.push_back(std::move(t));
      m.alphas.push_back(1.0);
      m.errors.push_back(0.0);
      break;
    }
    const double alpha = adaboost_stage_weight(eps, opts.learning_rate);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(wrong[i] ? alpha : -alpha);
      total += w[i];
    }
    for (double& v : w) v /= total;
    m.stumps.push_back(std::move(t));
    m.alphas.push_back(alpha);
    m.errors.push_back(eps);
    if (opts.on_round) opts.on_round(round + 1, w);
  }
  return m;
}

double log_odds_prior(std::span<const Label> y) {
  if (y.empty()) throw Error(Errc::input, "no labels");
  const double pos = static_cast<double>(std::count(y.begin(), y.end(), Label::fake));
  const double n = static_cast<double>(y.size());
  if (pos == 0.0 || pos == n) throw Error(Errc::training, "log-odds undefined for a single class");
  return std::log(pos / (n - pos));
}

double GradientBoostingModel::decision(CsrMatrix::Row row) const {
  double f = f0;
  for (const auto& t : trees) f += learning_rate * t.predict_value(row);
  return f;
}

GradientBoostingModel train_gradient_boosting(const CsrMatrix& x, std::span<const Label> y,
                                              const GradientBoostingOptions& opts) {
  detail::check_training_input(x, y);
  const std::size_t n = x.rows;
  GradientBoostingModel m;
  m.learning_rate = opts.learning_rate;
  m.f0 = log_odds_prior(y);
  std::vector<double> f(n, m.f0), residual(n), hessian(n);
  m.train_loss.push_back(mean_log_loss(f, y));
  TreeOptions to;
  to.max_depth = opts.max_depth;
  to.min_samples_split = opts.min_samples_split;
  for (std::size_t round = 0; round < opts.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(f[i]);
      residual[i] = (y[i] == Label::fake ? 1.0 : 0.0) - p;
      hessian[i] = p * (1.0 - p);
    }
    DecisionTree t = fit_regression_tree(x, residual, hessian, to);
    for (std::size_t i = 0; i < n; ++i) f[i] += opts.learning_rate * t.predict_value(x.row(i));
    m.trees.push_back(std::move(t));
    m.train_loss.push_back(mean_log_loss(f, y));
  }
  return m;
}

json to_json(const DecisionTree& t) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
       value = json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

DecisionTree tree_from_json(const json& j) {
  auto feature = j.at("feature").get<std::vector<std::int32_t>>();
  auto threshold = j.at("threshold").get<std::vector<double>>();
  auto left = j.at("left").get<std::vector<std::int32_t>>();
  auto right = j.at("right").get<std::vector<std::int32_t>>();
  auto value = j.at("value").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n || n == 0)
    throw Error(Errc::input, "malformed tree arrays");
  DecisionTree t;
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0) {
      auto ok = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(n); };
      if (!ok(left[i]) || !ok(right[i])) throw Error(Errc::input, "malformed tree child index");
    }
    t.nodes.push_back(TreeNode{feature[i], threshold[i], left[i], right[i], value[i]});
  }
  return t;
}

json to_json(const RandomForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(to_json(t));
  return {{"trees", trees}};
}

RandomForestModel forest_from_json(const json& j) {
  RandomForestModel m;
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
  return m;
}

json to_json(const AdaBoostModel& m) {
  json stumps = json::array();
  for (const auto& t : m.stumps) stumps.push_back(to_json(t));
  return {{"stumps", stumps}, {"alphas", m.alphas}, {"errors", m.errors}};
}

AdaBoostModel adaboost_from_json(const json& j) {
  AdaBoostModel m;
  for (const auto& t : j.at("stumps")) m.stumps.push_back(tree_from_json(t));
  m.alphas = j.at("alphas").get<std::vector<double>>();
  m.errors = j.value("errors", std::vector<double>{});
  if (m.alphas.size() != m.stumps.size()) throw Error(Errc::input, "stage weights and stumps differ in count");
  return m;
}

json to_json(const GradientBoostingModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(to_json(t));
  return {{"f0", m.f0}, {"learning_rate", m.learning_rate}, {"trees", trees}, {"train_loss", m.train_loss}};
}

GradientBoostingModel gradient_boosting_from_json(const json& j) {
  GradientBoostingModel m;
  m.f0 = j.at("f0").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
  m.train_loss = j.value("train_loss", std::vector<double>{});
  return m;
}

}  // namespace newshub::models
