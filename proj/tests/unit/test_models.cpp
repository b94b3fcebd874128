#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../support.hpp"
#include "newshub/error.hpp"
#include "newshub/models/model.hpp"

using namespace newshub;
using namespace newshub::models;
using features::CsrMatrix;
using features::TokenList;

namespace {

std::vector<Label> L(std::initializer_list<int> v) { return labels_from_ints(std::vector<int>(v)); }

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::io;
}

// Small separable text corpus shared by the round-trip tests.
struct Toy {
  std::vector<TokenList> docs;
  std::vector<Label> y;
  features::Vocabulary vocab;
  FeatureSet fs;

  Toy() {
    const char* fake[] = {"shocking secret hoax", "miracle hoax exposed", "secret coverup shocking",
                          "banned miracle secret", "hoax exposed coverup", "shocking banned hoax"};
    const char* real[] = {"official report data", "statement confirmed report", "approved official data",
                          "published report statement", "data confirmed official", "report approved published"};
    for (int i = 0; i < 6; ++i) {
      docs.push_back(features::tokenize(fake[i]));
      y.push_back(Label::fake);
      docs.push_back(features::tokenize(real[i]));
      y.push_back(Label::real);
    }
    vocab = features::build_vocabulary(docs, 1);
    fs = make_feature_set(docs, vocab);
  }
};

}  // namespace

TEST_SUITE("naive bayes") {
  TEST_CASE("multinomial hand-computed scores") {
    // terms: fake(0), news(1)
    const auto x = CsrMatrix::from_dense({{0, 2}, {2, 1}});
    const auto m = train_naive_bayes(x, L({0, 1}), NbVariant::multinomial);
    const auto q = CsrMatrix::from_dense({{2, 1}});
    const auto s = m.scores(q.row(0));
    CHECK(s[0] == doctest::Approx(std::log(0.5) + 2 * std::log(0.25) + std::log(0.75)));
    CHECK(s[1] == doctest::Approx(std::log(0.5) + 2 * std::log(0.6) + std::log(0.4)));
    CHECK(m.predict_row(q.row(0)) == Label::fake);
  }

  TEST_CASE("bernoulli uses absent terms") {
    const auto x = CsrMatrix::from_dense({{1, 0}, {0, 1}, {1, 1}});
    const auto m = train_naive_bayes(x, L({0, 1, 1}), NbVariant::bernoulli);
    // P(t0|0) = 2/3, P(t1|0) = 1/3, P(t0|1) = 2/4, P(t1|1) = 3/4
    const auto q = CsrMatrix::from_dense({{1, 0}});
    const auto s = m.scores(q.row(0));
    CHECK(s[0] == doctest::Approx(std::log(1.0 / 3) + std::log(2.0 / 3) + std::log(2.0 / 3)));
    CHECK(s[1] == doctest::Approx(std::log(2.0 / 3) + std::log(0.5) + std::log(0.25)));
  }

  TEST_CASE("empty row with equal priors ties to real") {
    const auto x = CsrMatrix::from_dense({{1, 0}, {0, 1}});
    const auto m = train_naive_bayes(x, L({0, 1}), NbVariant::multinomial);
    CsrMatrix empty;
    empty.cols = 2;
    empty.push_row({});
    CHECK(m.predict_row(empty.row(0)) == Label::real);
  }

  TEST_CASE("single class is a training error") {
    const auto x = CsrMatrix::from_dense({{1, 0}, {0, 1}});
    CHECK(code_of([&] { train_naive_bayes(x, L({1, 1}), NbVariant::multinomial); }) == Errc::training);
  }
}

TEST_SUITE("trees") {
  TEST_CASE("one feature splits at the midpoint") {
    const auto x = CsrMatrix::from_dense({{0}, {1}, {2}, {3}});
    const auto t = train_tree(x, L({0, 0, 1, 1}));
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == doctest::Approx(1.5));
    CHECK(t.depth() == 1);
    CHECK(t.leaves() == 2);
  }

  TEST_CASE("pure input is a single leaf") {
    const auto x = CsrMatrix::from_dense({{0}, {1}});
    const auto t = train_tree(x, L({1, 1}));
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.predict_row(x.row(0)) == Label::fake);
  }

  TEST_CASE("identical rows with mixed labels tie to real") {
    const auto x = CsrMatrix::from_dense({{1, 1}, {1, 1}});
    const auto t = train_tree(x, L({0, 1}));
    CHECK(t.nodes.size() == 1);
    CHECK(t.predict_row(x.row(0)) == Label::real);
  }

  TEST_CASE("max_depth caps growth") {
    const auto x = CsrMatrix::from_dense({{0}, {1}, {2}, {3}, {4}, {5}});
    const auto y = L({0, 1, 0, 1, 0, 1});
    CHECK(train_tree(x, y).depth() > 1);
    TreeOptions o;
    o.max_depth = 1;
    CHECK(train_tree(x, y, o).depth() == 1);
  }

  TEST_CASE("sqrt_features") {
    CHECK(sqrt_features(0) == 1);
    CHECK(sqrt_features(10) == 3);
    CHECK(sqrt_features(16) == 4);
  }

  TEST_CASE("adaboost stage weight") {
    CHECK(adaboost_stage_weight(0.25, 1.0) == doctest::Approx(0.5 * std::log(3.0)));
    CHECK(adaboost_stage_weight(0.25, 0.5) == doctest::Approx(0.25 * std::log(3.0)));
    CHECK_THROWS_AS(adaboost_stage_weight(0.0, 1.0), Error);
  }

  TEST_CASE("adaboost weights stay normalized") {
    const auto x = CsrMatrix::from_dense({{0, 1}, {1, 0}, {1, 1}, {0, 0}, {2, 1}, {1, 2}});
    const auto y = L({0, 1, 1, 0, 1, 0});
    AdaBoostOptions o;
    o.n_estimators = 5;
    std::size_t rounds = 0;
    o.on_round = [&](std::size_t, std::span<const double> w) {
      ++rounds;
      double s = 0;
      for (double v : w) s += v;
      CHECK(s == doctest::Approx(1.0));
    };
    const auto m = train_adaboost(x, y, o);
    CHECK(rounds == m.stumps.size());
    CHECK(m.alphas.size() == m.stumps.size());
  }

  TEST_CASE("gradient boosting starts at the log odds") {
    const auto x = CsrMatrix::from_dense({{0}, {1}, {2}, {3}});
    const auto y = L({1, 1, 1, 0});
    CHECK(log_odds_prior(y) == doctest::Approx(std::log(3.0)));
    GradientBoostingOptions o;
    o.n_estimators = 10;
    const auto m = train_gradient_boosting(x, y, o);
    CHECK(m.f0 == doctest::Approx(std::log(3.0)));
    CHECK(m.train_loss.size() == 11);
    for (std::size_t i = 1; i < m.train_loss.size(); ++i) CHECK(m.train_loss[i] <= m.train_loss[i - 1] + 1e-12);
  }
}

TEST_SUITE("knn") {
  const auto x = CsrMatrix::from_dense({{0}, {1}, {2}, {10}});
  const auto y = L({1, 1, 0, 0});

  TEST_CASE("k of one, three and four") {
    const auto q = CsrMatrix::from_dense({{3}});
    const auto m1 = train_knn(x, y, 1);
    CHECK(m1.predict_row(q.row(0)) == Label::real);
    const auto m3 = train_knn(x, y, 3);
    CHECK(m3.neighbors(q.row(0)) == std::vector<std::size_t>{2, 1, 0});
    CHECK(m3.predict_row(q.row(0)) == Label::fake);
    CHECK(train_knn(x, y, 4).predict_row(q.row(0)) == Label::real);
  }

  TEST_CASE("equal distances prefer the lower index") {
    const auto q = CsrMatrix::from_dense({{1.5}});
    CHECK(train_knn(x, y, 2).neighbors(q.row(0)) == std::vector<std::size_t>{1, 2});
  }

  TEST_CASE("k larger than the training set") {
    CHECK(code_of([&] { train_knn(x, y, 5); }) == Errc::input);
  }
}

TEST_SUITE("linear") {
  TEST_CASE("logistic objective at zero") {
    const auto x = CsrMatrix::from_dense({{1, 0}, {0, 1}});
    const std::vector<double> w = {0, 0};
    std::vector<double> g(3);
    const double f = logistic_objective(x, L({0, 1}), w, 0.0, 1.0, g);
    CHECK(f == doctest::Approx(2 * std::log(2.0)));
    CHECK(g[0] == doctest::Approx(0.5));
    CHECK(g[1] == doctest::Approx(-0.5));
    CHECK(g[2] == doctest::Approx(0.0));
  }

  TEST_CASE("logistic separates a toy problem") {
    Toy t;
    const auto m = train_logistic(t.fs.tfidf, t.y);
    CHECK(m.gradient_norm <= 1e-6);
    for (std::size_t i = 0; i < t.y.size(); ++i) CHECK(m.predict_row(t.fs.tfidf.row(i)) == t.y[i]);
  }

  TEST_CASE("zero decision maps to real") {
    LinearModel m;
    m.weights = {0.0};
    CsrMatrix q = CsrMatrix::from_dense({{1}});
    CHECK(m.predict_row(q.row(0)) == Label::real);
  }
}

TEST_SUITE("hyperparameters") {
  TEST_CASE("defaults") {
    const auto nb = Hyperparameters::defaults(ModelKind::multinomial_nb);
    CHECK(nb.number("alpha") == 1.0);
    CHECK(nb.flag("fit_prior"));
    const auto rf = Hyperparameters::defaults(ModelKind::random_forest, 9);
    CHECK(rf.seed() == 9);
    CHECK(rf.count("n_estimators") == 100);
    CHECK(rf.get("max_features") == "sqrt");
    CHECK_FALSE(Hyperparameters::defaults(ModelKind::decision_tree).optional_count("max_depth"));
    CHECK_FALSE(has_published_defaults(ModelKind::knn));
  }

  TEST_CASE("validation") {
    auto lr = Hyperparameters::defaults(ModelKind::logistic_regression);
    CHECK(code_of([&] { lr.set("penalty", "l1"); }) == Errc::validation);
    CHECK(code_of([&] { lr.set("gamma", 1); }) == Errc::validation);
    CHECK(code_of([&] { lr.set("C", -1.0); }) == Errc::validation);
    CHECK(code_of([&] { lr.set("max_iter", "many"); }) == Errc::validation);
    lr.set("C", 0.5);
    CHECK(lr.number("C") == 0.5);
    CHECK(code_of([] { model_kind_from_string("xgboost"); }) == Errc::validation);
  }

  TEST_CASE("json round-trip") {
    auto h = Hyperparameters::defaults(ModelKind::gradient_boosting, 4);
    h.set("n_estimators", 7);
    const auto back = Hyperparameters::from_json(h.to_json());
    CHECK(back.kind() == ModelKind::gradient_boosting);
    CHECK(back.seed() == 4);
    CHECK(back.count("n_estimators") == 7);
    CHECK(code_of([] { Hyperparameters::from_json({{"kind", "knn"}, {"values", {{"k", 3}}}}); }) ==
          Errc::validation);
  }

  TEST_CASE("names") {
    for (auto k : all_model_kinds()) CHECK(model_kind_from_string(to_string(k)) == k);
    CHECK(std::string(display_name(ModelKind::multinomial_nb)) == "Multinomial Naive Bayes");
    CHECK(all_model_kinds().size() == 10);
  }
}

TEST_SUITE("trained models") {
  TEST_CASE("every kind survives a save and load") {
    Toy t;
    testing::TempDir dir;
    for (auto kind : all_model_kinds()) {
      CAPTURE(to_string(kind));
      auto params = Hyperparameters::defaults(kind, 3);
      if (kind == ModelKind::knn) params.set("n_neighbors", 3);
      const auto model = train_model(params, t.fs, t.y);
      const auto path = dir / (std::string(to_string(kind)) + ".json");
      save_model(model, path);
      const auto back = load_model(path);
      CHECK(back.kind() == kind);
      CHECK(back.vocabulary_fingerprint == t.vocab.fingerprint());
      CHECK(predict(back, t.fs) == predict(model, t.fs));
    }
  }

  TEST_CASE("feature mismatch is refused") {
    Toy t;
    const auto model = train_model(Hyperparameters::defaults(ModelKind::logistic_regression), t.fs, t.y);
    const auto other = CsrMatrix::from_dense({{1, 2}});
    CHECK(code_of([&] { predict(model, other); }) == Errc::input);
    auto fs = t.fs;
    fs.vocabulary_fingerprint = "something-else";
    CHECK(code_of([&] { predict(model, fs); }) == Errc::input);
  }

  TEST_CASE("empty input predicts nothing") {
    Toy t;
    const auto model = train_model(Hyperparameters::defaults(ModelKind::bernoulli_nb), t.fs, t.y);
    CsrMatrix none;
    none.cols = t.fs.cols();
    CHECK(predict(model, none).empty());
  }

  TEST_CASE("label count must match rows") {
    Toy t;
    const auto y = L({0, 1});
    CHECK_THROWS_AS(train_model(Hyperparameters::defaults(ModelKind::decision_tree), t.fs, y), Error);
  }
}

TEST_SUITE("external predictions") {
  TEST_CASE("three rows with a header") {
    std::istringstream in(R"({"model_name":"DistilBERT"}
{"record_id":"a","label":1}
{"record_id":"b","label":0}
{"record_id":"c","label":1}
)");
    const auto p = import_external_predictions(in);
    CHECK(p.model_name == "DistilBERT");
    REQUIRE(p.predictions.size() == 3);
    CHECK(p.predictions[1].record_id == "b");
    CHECK(p.predictions[2].label == Label::fake);
  }

  TEST_CASE("bad label") {
    std::istringstream in(R"({"record_id":"a","label":2})");
    CHECK(code_of([&] { import_external_predictions(in); }) == Errc::validation);
  }

  TEST_CASE("unknown ids") {
    const std::set<std::string> known = {"a"};
    std::istringstream strict_in("{\"record_id\":\"a\",\"label\":1}\n{\"record_id\":\"zz\",\"label\":0}\n");
    try {
      import_external_predictions(strict_in, &known, true);
      FAIL("expected unknown id error");
    } catch (const IdListError& e) {
      CHECK(e.code() == Errc::input);
      CHECK(e.ids() == std::vector<std::string>{"zz"});
    }
    std::istringstream lenient_in("{\"record_id\":\"a\",\"label\":1}\n{\"record_id\":\"zz\",\"label\":0}\n");
    const auto p = import_external_predictions(lenient_in, &known, false);
    CHECK(p.predictions.size() == 1);
    CHECK(p.unmatched == std::vector<std::string>{"zz"});
  }

  TEST_CASE("write then read") {
    const std::vector<Prediction> preds = {{"x", Label::fake}, {"y", Label::real}};
    std::stringstream buf;
    write_predictions(buf, "m", preds);
    const auto back = import_external_predictions(buf);
    CHECK(back.model_name == "m");
    CHECK(back.predictions.size() == 2);
    CHECK(back.predictions[0].label == Label::fake);
  }
}
