#include <doctest.h>

#include <atomic>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include "../support.hpp"
#include "newshub/error.hpp"
#include "newshub/labeling/kappa.hpp"
#include "newshub/labeling/llm.hpp"
#include "newshub/labeling/workflow.hpp"

using namespace newshub;
using namespace newshub::labeling;

namespace {

std::vector<Annotator> people(std::initializer_list<const char*> ids) {
  std::vector<Annotator> out;
  for (const char* id : ids) out.push_back({id, id, Role::other});
  return out;
}

std::vector<std::string> record_ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("rec-" + std::to_string(i));
  return out;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::io;
}

Timestamp t0() { return make_timestamp(2023, 11, 1); }

// Store with two annotators (a, b) reviewing n records, plus a third (c).
LabelingStore small_store(std::size_t n) {
  LabelingStore s;
  for (const auto& a : people({"a", "b", "c"})) s.add_annotator(a);
  std::vector<Assignment> batch;
  for (const auto& id : record_ids(n)) {
    batch.push_back({id + "/r1a", id, "a"});
    batch.push_back({id + "/r1b", id, "b"});
  }
  s.add_assignments(batch);
  return s;
}

ConsolidatedRecord record(const std::string& id) {
  ConsolidatedRecord r;
  r.id = id;
  r.dataset = "d";
  r.text = "text of " + id;
  return r;
}

}  // namespace

TEST_SUITE("kappa") {
  TEST_CASE("worked example") {
    const auto a = labels_from_ints(std::vector<int>{1, 1, 1, 1, 1, 0, 0, 0, 0, 0});
    const auto b = labels_from_ints(std::vector<int>{1, 1, 1, 1, 0, 1, 0, 0, 0, 0});
    const auto r = cohen_kappa(a, b);
    CHECK(r.p_o == doctest::Approx(0.8));
    CHECK(r.p_e == doctest::Approx(0.5));
    CHECK(r.kappa == doctest::Approx(0.6));
    CHECK_FALSE(r.passes_gate);
  }

  TEST_CASE("perfect agreement and the undefined case") {
    const auto a = labels_from_ints(std::vector<int>{1, 0, 1, 0});
    CHECK(cohen_kappa(a, a).kappa == doctest::Approx(1.0));
    CHECK(cohen_kappa(a, a).passes_gate);
    const auto ones = labels_from_ints(std::vector<int>{1, 1, 1});
    CHECK(code_of([&] { cohen_kappa(ones, ones); }) == Errc::undefined_kappa);
  }

  TEST_CASE("input errors") {
    const auto a = labels_from_ints(std::vector<int>{1, 0});
    const auto b = labels_from_ints(std::vector<int>{1});
    CHECK(code_of([&] { cohen_kappa(a, b); }) == Errc::input);
    CHECK(code_of([&] { cohen_kappa({}, {}); }) == Errc::input);
  }

  TEST_CASE("gate only counts pairs with enough items") {
    AgreementSummary s;
    AgreementReport small{"a", "b", 10, 0.8, 0.5, 0.6, false};
    AgreementReport big{"a", "c", 40, 0.8, 0.5, 0.6, false};
    s.pairs = {small};
    CHECK(gate_failures(s, {}).empty());
    s.pairs = {small, big};
    CHECK(gate_failures(s, {}).size() == 1);
  }
}

TEST_SUITE("assignment") {
  TEST_CASE("four records, two annotators") {
    const auto who = people({"a", "b"});
    const auto out = assign_reviews(record_ids(4), who, 7);
    CHECK(out.size() == 8);
    std::map<std::string, int> load;
    for (const auto& x : out) ++load[x.annotator_id];
    CHECK(load["a"] == 4);
    CHECK(load["b"] == 4);
  }

  TEST_CASE("six records, three annotators balance exactly") {
    const auto who = people({"a", "b", "c"});
    const auto out = assign_reviews(record_ids(6), who, 7);
    CHECK(out.size() == 12);
    std::map<std::string, int> load;
    std::map<std::string, std::set<std::string>> per_record;
    for (const auto& x : out) {
      ++load[x.annotator_id];
      CHECK(per_record[x.record_id].insert(x.annotator_id).second);
    }
    for (const auto& [who_id, n] : load) CHECK(n == 4);
  }

  TEST_CASE("loads never differ by more than one") {
    const auto who = people({"a", "b", "c", "d", "e", "f"});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::map<std::string, int> load;
      for (const auto& x : assign_reviews(record_ids(37), who, seed)) ++load[x.annotator_id];
      int lo = 1 << 30, hi = 0;
      for (const auto& [k, n] : load) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      CHECK(hi - lo <= 1);
    }
  }

  TEST_CASE("seeded and deterministic") {
    const auto who = people({"a", "b", "c", "d"});
    CHECK(assign_reviews(record_ids(20), who, 7) == assign_reviews(record_ids(20), who, 7));
  }

  TEST_CASE("preconditions") {
    const auto one = people({"a"});
    CHECK(code_of([&] { assign_reviews(record_ids(3), one, 7); }) == Errc::config);
    const auto dup = people({"a", "a"});
    CHECK(code_of([&] { assign_reviews(record_ids(3), dup, 7); }) == Errc::config);
  }
}

TEST_SUITE("adjudicate") {
  Review rv(const char* who, int label, int round = 1) {
    Review r;
    r.record_id = "x";
    r.annotator_id = who;
    r.label = label_from_int(label);
    r.round = round;
    return r;
  }

  TEST_CASE("agreement") {
    const std::vector<Review> rs = {rv("a", 1), rv("b", 1)};
    const auto out = adjudicate("x", rs);
    CHECK(out.status == AdjudicationStatus::agreed);
    CHECK(out.final_label == Label::fake);
  }

  TEST_CASE("disagreement needs a third review") {
    const std::vector<Review> rs = {rv("a", 1), rv("b", 0)};
    const auto out = adjudicate("x", rs);
    CHECK(out.status == AdjudicationStatus::needs_adjudication);
    CHECK_FALSE(out.final_label.has_value());
  }

  TEST_CASE("third review decides by majority") {
    const std::vector<Review> rs = {rv("a", 1), rv("b", 0), rv("c", 0, 2)};
    const auto out = adjudicate("x", rs);
    CHECK(out.status == AdjudicationStatus::adjudicated_by_third);
    CHECK(out.final_label == Label::real);
    CHECK(out.resolver_id == "c");
  }

  TEST_CASE("same annotator twice is an integrity error") {
    const std::vector<Review> rs = {rv("a", 1), rv("a", 0)};
    CHECK(code_of([&] { adjudicate("x", rs); }) == Errc::integrity);
  }
}

TEST_SUITE("store") {
  TEST_CASE("review, repeat, conflict") {
    auto s = small_store(1);
    const auto first = s.record_review("rec-0/r1a", Label::fake, std::nullopt, t0());
    CHECK(first.created);
    CHECK(s.assignment("rec-0/r1a")->state == AssignmentState::submitted);
    const auto again = s.record_review("rec-0/r1a", Label::fake, std::nullopt, t0());
    CHECK_FALSE(again.created);
    CHECK(s.reviews().size() == 1);
    CHECK(code_of([&] { s.record_review("rec-0/r1a", Label::real, std::nullopt, t0()); }) == Errc::conflict);
    CHECK(s.reviews()[0].label == Label::fake);
  }

  TEST_CASE("unknown assignment") {
    auto s = small_store(1);
    CHECK(code_of([&] { s.record_review("nope", Label::fake, std::nullopt, t0()); }) == Errc::not_found);
  }

  TEST_CASE("queue holds pending assignments only") {
    auto s = small_store(3);
    CHECK(s.queue("a").size() == 3);
    s.record_review("rec-1/r1a", Label::real, std::nullopt, t0());
    const auto q = s.queue("a");
    REQUIRE(q.size() == 2);
    CHECK(q[0].record_id == "rec-0");
    CHECK(q[1].record_id == "rec-2");
    CHECK(s.queue("c").empty());
  }

  TEST_CASE("tie-break flow") {
    auto s = small_store(1);
    s.record_review("rec-0/r1a", Label::fake, std::nullopt, t0());
    CHECK(s.adjudication_cases("c").empty());
    s.record_review("rec-0/r1b", Label::real, std::nullopt, t0());
    CHECK(s.adjudication_cases("c") == std::vector<std::string>{"rec-0"});
    CHECK(s.adjudication_cases("a").empty());
    CHECK(s.agreement().unresolved_disagreements == 1);
    CHECK(code_of([&] { s.record_third_review("rec-0", "a", Label::real, std::nullopt, t0()); }) ==
          Errc::integrity);
    const auto third = s.record_third_review("rec-0", "c", Label::real, std::nullopt, t0());
    CHECK(third.created);
    CHECK_FALSE(s.record_third_review("rec-0", "c", Label::real, std::nullopt, t0()).created);
    CHECK(code_of([&] { s.record_third_review("rec-0", "c", Label::fake, std::nullopt, t0()); }) ==
          Errc::conflict);
    const auto adj = s.adjudication("rec-0");
    REQUIRE(adj);
    CHECK(adj->status == AdjudicationStatus::adjudicated_by_third);
    CHECK(adj->final_label == Label::real);
    CHECK(s.adjudication_cases("c").empty());
    CHECK(s.agreement().unresolved_disagreements == 0);
  }

  TEST_CASE("third review on an agreed record is refused") {
    auto s = small_store(1);
    s.record_review("rec-0/r1a", Label::fake, std::nullopt, t0());
    s.record_review("rec-0/r1b", Label::fake, std::nullopt, t0());
    CHECK(code_of([&] { s.record_third_review("rec-0", "c", Label::real, std::nullopt, t0()); }) == Errc::input);
  }

  TEST_CASE("supersede corrects and logs") {
    auto s = small_store(1);
    s.record_review("rec-0/r1a", Label::fake, std::nullopt, t0());
    const auto r = s.supersede("rec-0/r1a", Label::real, "a", "misread", t0());
    CHECK(r.label == Label::real);
    REQUIRE(s.supersedes().size() == 1);
    CHECK(s.supersedes()[0].old_label == Label::fake);
    CHECK(s.reviews()[0].label == Label::real);
  }

  TEST_CASE("assignments must name two distinct annotators") {
    LabelingStore s;
    for (const auto& a : people({"a", "b"})) s.add_annotator(a);
    const std::vector<Assignment> same = {{"x/r1a", "x", "a"}, {"x/r1b", "x", "a"}};
    CHECK_THROWS_AS(s.add_assignments(same), Error);
    const std::vector<Assignment> ok = {{"x/r1a", "x", "a"}, {"x/r1b", "x", "b"}};
    s.add_assignments(ok);
    CHECK_THROWS_AS(s.add_assignments(ok), Error);
  }

  TEST_CASE("concurrent submissions to one assignment store one review") {
    auto s = small_store(1);
    std::vector<std::thread> threads;
    std::atomic<int> created{0}, conflicts{0};
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&, i] {
        try {
          if (s.record_review("rec-0/r1a", i % 2 ? Label::fake : Label::real, std::nullopt, t0()).created) ++created;
        } catch (const Error& e) {
          if (e.code() == Errc::conflict) ++conflicts;
        }
      });
    }
    for (auto& t : threads) t.join();
    CHECK(created == 1);
    CHECK(s.reviews().size() == 1);
    CHECK(conflicts == 4);
  }

  TEST_CASE("journal replays to the same state") {
    testing::TempDir dir;
    const auto journal = dir / "journal.jsonl";
    {
      auto s = LabelingStore::open(journal);
      for (const auto& a : people({"a", "b", "c"})) s.add_annotator(a);
      const std::vector<Assignment> batch = {{"x/r1a", "x", "a"}, {"x/r1b", "x", "b"}};
      s.add_assignments(batch);
      s.record_review("x/r1a", Label::fake, std::string("sure"), t0());
      s.record_review("x/r1b", Label::real, std::nullopt, t0());
      s.record_third_review("x", "c", Label::fake, std::nullopt, t0());
      s.add_suggestion({"x", Label::fake, "FAKE", "stub", t0()});
      s.set_suggestions_visible(true);
    }
    auto back = LabelingStore::open(journal);
    CHECK(back.annotators().size() == 3);
    CHECK(back.reviews().size() == 3);
    CHECK(back.reviews()[0].note == "sure");
    CHECK(back.adjudication("x")->final_label == Label::fake);
    CHECK(back.suggestion("x")->raw_response == "FAKE");
    CHECK(back.suggestions_visible());
    CHECK_FALSE(back.record_review("x/r1a", Label::fake, std::nullopt, t0()).created);
  }

  TEST_CASE("suggestions are hidden until enabled") {
    LabelingStore s;
    CHECK_FALSE(s.suggestions_visible());
  }
}

TEST_SUITE("scripted reviews") {
  TEST_CASE("first round then tie-break lines") {
    testing::TempDir dir;
    auto s = small_store(2);
    testing::spit(dir / "script.jsonl",
                  R"({"record_id":"rec-0","annotator_id":"a","label":1}
{"record_id":"rec-0","annotator_id":"b","label":0,"note":"hmm"}
{"record_id":"rec-1","annotator_id":"a","label":0}
{"record_id":"rec-1","annotator_id":"b","label":0}
{"record_id":"rec-0","annotator_id":"c","label":1}
{"record_id":"rec-1","annotator_id":"a","label":0}
)");
    const auto stats = apply_scripted_reviews(s, dir / "script.jsonl", t0());
    CHECK(stats.first_round == 4);
    CHECK(stats.third_round == 1);
    CHECK(stats.duplicates == 1);
    CHECK(s.adjudication("rec-0")->final_label == Label::fake);
  }
}

TEST_SUITE("qc sample") {
  TEST_CASE("size, identity and determinism") {
    CHECK(qc_sample_indices(100, 0.1, 7).size() == 10);
    const auto all = qc_sample_indices(12, 1.0, 7);
    REQUIRE(all.size() == 12);
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
    CHECK(qc_sample_indices(50, 0.3, 3) == qc_sample_indices(50, 0.3, 3));
    CHECK(qc_sample_indices(100, 0.07, 1).size() == 7);
    CHECK(qc_sample_indices(5, 0.01, 1).size() == 1);
  }

  TEST_CASE("bad rates") {
    CHECK_THROWS_AS(qc_sample_indices(10, 0.0, 1), Error);
    CHECK_THROWS_AS(qc_sample_indices(10, 1.5, 1), Error);
    CHECK_THROWS_AS(qc_sample_indices(0, 0.5, 1), Error);
  }
}

TEST_SUITE("export") {
  TEST_CASE("all agreed exports everything") {
    auto s = small_store(2);
    for (const char* id : {"rec-0/r1a", "rec-0/r1b"}) s.record_review(id, Label::fake, std::nullopt, t0());
    for (const char* id : {"rec-1/r1a", "rec-1/r1b"}) s.record_review(id, Label::real, std::nullopt, t0());
    const Corpus corpus = {record("rec-0"), record("rec-1")};
    const auto adj = s.adjudications();
    ExportOptions strict;
    strict.strict = true;
    const auto out = export_labeled_corpus(corpus, adj, s.agreement(), strict);
    REQUIRE(out.records.size() == 2);
    CHECK(out.records[0].label == Label::fake);
    CHECK(out.records[1].label == Label::real);
  }

  TEST_CASE("unresolved record blocks strict export") {
    auto s = small_store(2);
    s.record_review("rec-0/r1a", Label::fake, std::nullopt, t0());
    s.record_review("rec-0/r1b", Label::real, std::nullopt, t0());
    s.record_review("rec-1/r1a", Label::real, std::nullopt, t0());
    s.record_review("rec-1/r1b", Label::real, std::nullopt, t0());
    const Corpus corpus = {record("rec-0"), record("rec-1")};
    const auto adj = s.adjudications();
    ExportOptions strict;
    strict.strict = true;
    try {
      export_labeled_corpus(corpus, adj, s.agreement(), strict);
      FAIL("expected export to be blocked");
    } catch (const IdListError& e) {
      CHECK(e.code() == Errc::export_blocked);
      CHECK(e.ids() == std::vector<std::string>{"rec-0"});
    }
    const auto lenient = export_labeled_corpus(corpus, adj, s.agreement(), {});
    CHECK(lenient.records.size() == 1);
    CHECK(lenient.skipped == std::vector<std::string>{"rec-0"});
  }

  TEST_CASE("pair kappa 0.6 over 40 items refuses export") {
    // Four blocks of the worked example: p_o 0.8, p_e 0.5.
    auto s = small_store(40);
    const int a[10] = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    const int b[10] = {1, 1, 1, 1, 0, 1, 0, 0, 0, 0};
    Corpus corpus;
    for (int i = 0; i < 40; ++i) {
      const std::string id = "rec-" + std::to_string(i);
      s.record_review(id + "/r1a", label_from_int(a[i % 10]), std::nullopt, t0());
      s.record_review(id + "/r1b", label_from_int(b[i % 10]), std::nullopt, t0());
      corpus.push_back(record(id));
    }
    const auto summary = s.agreement();
    REQUIRE(summary.pairs.size() == 1);
    CHECK(summary.pairs[0].n_items == 40);
    CHECK(summary.pairs[0].kappa == doctest::Approx(0.6));
    const auto adj = s.adjudications();
    try {
      export_labeled_corpus(corpus, adj, summary, {});
      FAIL("expected the gate to refuse");
    } catch (const IdListError& e) {
      CHECK(e.code() == Errc::gate_failed);
      REQUIRE(e.ids().size() == 1);
      CHECK(e.ids()[0].find("a|b") != std::string::npos);
    }
  }
}

TEST_SUITE("llm") {
  TEST_CASE("verdict parsing") {
    CHECK(parse_verdict("FAKE — fabricated quote") == Label::fake);
    CHECK(parse_verdict("Real") == Label::real);
    CHECK(parse_verdict("real.\nFAKE news would look different") == Label::real);
    CHECK(code_of([] { parse_verdict("uncertain"); }) == Errc::unparseable_verdict);
    CHECK(code_of([] { parse_verdict("fake or real?"); }) == Errc::unparseable_verdict);
    CHECK(code_of([] { parse_verdict("unreal"); }) == Errc::unparseable_verdict);
  }

  TEST_CASE("prompt rendering") {
    ConsolidatedRecord r = record("id-1");
    r.dataset = "Wire";
    CHECK(render_prompt("{id}|{dataset}|{text}", r) == "id-1|Wire|text of id-1");
  }

  TEST_CASE("stub client drives suggestions") {
    StubCompletionClient stub(std::map<std::string, std::string>{{"x", "FAKE — fabricated quote"}, {"y", "Real"}, {"z", "uncertain"}}, "stub-model");
    const auto s = suggest_label(record("x"), stub, default_prompt_template(), t0());
    CHECK(s.suggested_label == Label::fake);
    CHECK(s.model_name == "stub-model");
    CHECK(s.raw_response == "FAKE — fabricated quote");
    CHECK(suggest_label(record("y"), stub, default_prompt_template(), t0()).suggested_label == Label::real);
    CHECK(code_of([&] { suggest_label(record("z"), stub, default_prompt_template(), t0()); }) ==
          Errc::unparseable_verdict);
    CHECK(code_of([&] { suggest_label(record("w"), stub, default_prompt_template(), t0()); }) == Errc::not_found);
  }

  TEST_CASE("empty text is refused") {
    StubCompletionClient stub(std::map<std::string, std::string>{{"x", "Real"}});
    ConsolidatedRecord r = record("x");
    r.text = "  ";
    CHECK_THROWS_AS(suggest_label(r, stub, default_prompt_template(), t0()), Error);
  }

  TEST_CASE("chat request and response shapes") {
    LlmEndpoint ep{"https://llm.example.com/v1", "key", "model-x"};
    const auto req = build_chat_request(ep, "hello");
    CHECK(req["model"] == "model-x");
    CHECK(req["temperature"] == 0.0);
    REQUIRE(req["messages"].size() == 1);
    CHECK(req["messages"][0]["role"] == "user");
    CHECK(req["messages"][0]["content"] == "hello");
    CHECK(parse_chat_response(R"({"choices":[{"message":{"role":"assistant","content":"REAL"}}]})") == "REAL");
    CHECK(code_of([] { parse_chat_response(R"({"error":"x"})"); }) == Errc::upstream);
  }

  TEST_CASE("stub file format") {
    const auto stub = StubCompletionClient::from_file(testing::fixture_dir() / "pipeline" / "llm_stub.jsonl");
    CHECK(stub.model_name() == "stub-verifier");
  }
}
