#include <doctest.h>

#include <cmath>
#include <sstream>

#include "newshub/error.hpp"
#include "newshub/features/features.hpp"

using namespace newshub;
using namespace newshub::features;

TEST_SUITE("tokenize") {
  TEST_CASE("lowercases and splits") {
    CHECK(tokenize("Votes COUNTED, again!") == TokenList{"votes", "counted", "again"});
    CHECK(tokenize("").empty());
  }

  TEST_CASE("drops short tokens and digits, maps placeholders") {
    CHECK(tokenize("a 2024 [URL]") == TokenList{"url_tok"});
    CHECK(tokenize("mail [EMAIL] from [USER]") == TokenList{"mail", "email_tok", "from", "user_tok"});
    CHECK(tokenize("covid19 x") == TokenList{"covid19"});
  }
}

TEST_SUITE("vocabulary") {
  const std::vector<TokenList> docs = {
      {"vote", "count", "vote"}, {"vote", "fraud"}, {"count", "fraud", "rigged"}};

  TEST_CASE("min_df filters and terms are sorted") {
    const auto v = build_vocabulary(docs, 2);
    CHECK(v.terms == std::vector<std::string>{"count", "fraud", "vote"});
    CHECK(v.document_frequency == std::vector<std::size_t>{2, 2, 2});
    CHECK(v.n_documents == 3);
    CHECK(v.find("vote") == 2u);
    CHECK_FALSE(v.find("rigged"));
    CHECK(build_vocabulary(docs, 1).size() == 4);
  }

  TEST_CASE("max_features keeps the most frequent") {
    const std::vector<TokenList> d = {{"aa", "bb"}, {"aa", "cc"}, {"aa", "bb"}};
    const auto v = build_vocabulary(d, 1, 2);
    CHECK(v.terms == std::vector<std::string>{"aa", "bb"});
  }

  TEST_CASE("empty results are config errors") {
    try {
      build_vocabulary(docs, 5);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::config);
    }
    const std::vector<TokenList> blank = {{}, {}};
    CHECK_THROWS_AS(build_vocabulary(blank, 1), Error);
  }

  TEST_CASE("json round-trip keeps the fingerprint") {
    const auto v = build_vocabulary(docs, 1);
    const auto back = vocabulary_from_json(to_json(v));
    CHECK(back.terms == v.terms);
    CHECK(back.fingerprint() == v.fingerprint());
    CHECK(back.find("rigged") == v.find("rigged"));
    CHECK(build_vocabulary(docs, 2).fingerprint() != v.fingerprint());
  }
}

TEST_SUITE("tfidf") {
  TEST_CASE("rows are unit length and zero rows stay zero") {
    const std::vector<TokenList> docs = {{"vote", "count", "vote"}, {"vote", "fraud"}, {"nothing"}};
    const auto v = build_vocabulary(docs, 1);
    const auto m = tfidf(docs, v);
    CHECK(m.rows == 3);
    CHECK(m.cols == v.size());
    for (std::size_t r = 0; r < 2; ++r) {
      double s = 0;
      for (double x : m.row(r).values) s += x * x;
      CHECK(s == doctest::Approx(1.0));
    }
    const std::vector<TokenList> unseen = {{"zzz"}};
    const auto z = tfidf(unseen, v);
    CHECK(z.rows == 1);
    CHECK(z.row(0).size() == 0);
  }

  TEST_CASE("smoothed idf") {
    const std::vector<TokenList> docs = {{"aa", "bb"}, {"aa"}};
    const auto v = build_vocabulary(docs, 1);
    CHECK(idf(v, *v.find("aa")) == doctest::Approx(1.0));
    CHECK(idf(v, *v.find("bb")) == doctest::Approx(std::log(3.0 / 2.0) + 1.0));
  }

  TEST_CASE("hand-computed weights") {
    const std::vector<TokenList> docs = {{"aa", "aa", "bb"}, {"aa"}};
    const auto v = build_vocabulary(docs, 1);
    const auto m = tfidf(docs, v);
    const double wa = 2.0 * 1.0, wb = std::log(1.5) + 1.0;
    const double norm = std::sqrt(wa * wa + wb * wb);
    CHECK(m.at(0, *v.find("aa")) == doctest::Approx(wa / norm));
    CHECK(m.at(0, *v.find("bb")) == doctest::Approx(wb / norm));
    CHECK(m.at(1, *v.find("aa")) == doctest::Approx(1.0));
  }

  TEST_CASE("single document") {
    const std::vector<TokenList> docs = {{"solo", "word"}};
    const auto v = build_vocabulary(docs, 1);
    const auto m = tfidf(docs, v);
    CHECK(m.at(0, 0) == doctest::Approx(std::sqrt(0.5)));
  }

  TEST_CASE("counts ignore unknown tokens") {
    const std::vector<TokenList> docs = {{"aa", "aa", "bb"}};
    const auto v = build_vocabulary(docs, 1);
    const std::vector<TokenList> q = {{"aa", "cc", "aa", "aa"}};
    const auto m = count_matrix(q, v);
    CHECK(m.at(0, *v.find("aa")) == 3.0);
    CHECK(m.nnz() == 1);
  }
}

TEST_SUITE("csr") {
  TEST_CASE("dense round-trip and row selection") {
    const std::vector<std::vector<double>> d = {{0, 1.5, 0}, {0, 0, 0}, {2, 0, -1}};
    const auto m = CsrMatrix::from_dense(d);
    CHECK(m.nnz() == 3);
    CHECK(m.to_dense() == d);
    const std::vector<std::size_t> pick = {2, 0};
    const auto s = m.select_rows(pick);
    CHECK(s.to_dense() == std::vector<std::vector<double>>{{2, 0, -1}, {0, 1.5, 0}});
  }

  TEST_CASE("push_row sorts and drops zeros") {
    CsrMatrix m;
    m.cols = 4;
    m.push_row({{3, 1.0}, {0, 2.0}, {1, 0.0}});
    CHECK(m.rows == 1);
    CHECK(std::vector<std::uint32_t>(m.row(0).indices.begin(), m.row(0).indices.end()) ==
          std::vector<std::uint32_t>{0, 3});
  }

  TEST_CASE("triplets round-trip") {
    const auto m = CsrMatrix::from_dense({{0, 0.125, 0}, {0, 0, 0}, {1.0 / 3.0, 0, 7}});
    std::stringstream buf;
    write_triplets(buf, m);
    const std::string text = buf.str();
    CHECK(text.rfind("3 3 3\n", 0) == 0);
    const auto back = read_triplets(buf);
    CHECK(back.to_dense() == m.to_dense());
  }

  TEST_CASE("bad triplets") {
    std::istringstream in("2 2 1\n5 0 1.0\n");
    CHECK_THROWS_AS(read_triplets(in), Error);
  }
}

TEST_SUITE("split") {
  std::vector<Label> alternating(std::size_t n, std::size_t fake_every = 2) {
    std::vector<Label> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(i % fake_every == 0 ? Label::fake : Label::real);
    return out;
  }

  TEST_CASE("ten balanced records") {
    const auto labels = alternating(10);
    const auto s = split(labels, {0.8, 7, true});
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);
    std::size_t fake_test = 0;
    for (auto i : s.test) fake_test += labels[i] == Label::fake;
    CHECK(fake_test == 1);
  }

  TEST_CASE("seventy-thirty keeps class ratios") {
    const auto labels = alternating(100, 5);  // 20 fake
    const auto s = split(labels, {0.7, 11, true});
    CHECK(s.train.size() == 70);
    CHECK(s.test.size() == 30);
    std::size_t fake_train = 0;
    for (auto i : s.train) fake_train += labels[i] == Label::fake;
    CHECK(fake_train >= 13);
    CHECK(fake_train <= 15);
  }

  TEST_CASE("partition, order and determinism") {
    const auto labels = alternating(37, 3);
    for (bool strat : {true, false}) {
      const auto s = split(labels, {0.75, 5, strat});
      std::vector<int> seen(labels.size(), 0);
      for (auto i : s.train) ++seen[i];
      for (auto i : s.test) ++seen[i];
      for (int c : seen) CHECK(c == 1);
      CHECK(std::is_sorted(s.train.begin(), s.train.end()));
      CHECK(std::is_sorted(s.test.begin(), s.test.end()));
      const auto again = split(labels, {0.75, 5, strat});
      CHECK(again.train == s.train);
    }
  }

  TEST_CASE("input errors") {
    CHECK_THROWS_AS(split(alternating(4), {}), Error);
    std::vector<Label> lone(10, Label::real);
    lone[3] = Label::fake;
    CHECK_THROWS_AS(split(lone, {0.8, 1, true}), Error);
    CHECK_NOTHROW(split(lone, {0.8, 1, false}));
  }
}

TEST_SUITE("upsample") {
  TEST_CASE("minority grows to match") {
    const std::vector<Label> labels = {Label::real, Label::real, Label::real, Label::real,
                                       Label::real, Label::real, Label::fake, Label::fake};
    const std::vector<std::size_t> train = {0, 1, 2, 3, 4, 5, 6, 7};
    const auto out = upsample(train, labels, 3);
    REQUIRE(out.size() == 12);
    std::size_t fake = 0;
    for (auto i : out) fake += labels[i] == Label::fake;
    CHECK(fake == 6);
    CHECK(std::equal(train.begin(), train.end(), out.begin()));
  }

  TEST_CASE("balanced input is unchanged") {
    const std::vector<Label> labels = {Label::real, Label::fake, Label::real, Label::fake};
    const std::vector<std::size_t> train = {0, 1, 2, 3};
    CHECK(upsample(train, labels, 3) == train);
  }

  TEST_CASE("single class is an error") {
    const std::vector<Label> labels = {Label::real, Label::real};
    const std::vector<std::size_t> train = {0, 1};
    CHECK_THROWS_AS(upsample(train, labels, 3), Error);
  }
}
