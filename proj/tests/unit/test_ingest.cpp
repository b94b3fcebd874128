#include <doctest.h>

#include <sstream>

#include "../support.hpp"
#include "newshub/error.hpp"
#include "newshub/ingest/ingest.hpp"
#include "newshub/pipeline/pipeline.hpp"

using namespace newshub;
using namespace newshub::ingest;

namespace {

ConsolidatedRecord rec(std::string id, std::string text, std::optional<Timestamp> at = std::nullopt) {
  ConsolidatedRecord r;
  r.id = std::move(id);
  r.dataset = "d";
  r.text = std::move(text);
  r.published_at = at;
  return r;
}

IngestConfig window_config() {
  IngestConfig c;
  c.window_start = make_timestamp(2023, 4, 20);
  c.window_end = make_timestamp(2023, 10, 20);
  c.groups = {{"elections", "Elections", {"election", "vote"}}, {"health", "Health", {"vaccine"}}};
  return c;
}

}  // namespace

TEST_SUITE("scrub") {
  TEST_CASE("worked examples") {
    CHECK(scrub_pii("contact a@b.com") == "contact [EMAIL]");
    CHECK(scrub_pii("no personal data here") == "no personal data here");
    CHECK(scrub_pii("@alice shared http://x.y/z") == "[USER] shared [URL]");
  }

  TEST_CASE("urls keep trailing punctuation outside") {
    CHECK(scrub_pii("see https://t.co/abc.") == "see [URL].");
    CHECK(scrub_pii("(www.example.com/x)") == "([URL])");
  }

  TEST_CASE("url wins over the email inside it") {
    CHECK(scrub_pii("https://user@host.example.com/p") == "[URL]");
  }

  TEST_CASE("placeholders survive a second pass") {
    const std::string once = scrub_pii("mail me@x.io or @bob at www.x.org");
    CHECK(once == "mail [EMAIL] or [USER] at [URL]");
    CHECK(scrub_pii(once) == once);
    CHECK_FALSE(contains_pii(once));
  }
}

TEST_SUITE("snippets") {
  TEST_CASE("first five of seven sentences") {
    const std::string text = "One. Two is here. Three! Four? Five. Six. Seven.";
    CHECK(extract_snippet(text, 5) == "One. Two is here. Three! Four? Five.");
  }

  TEST_CASE("fewer sentences than the limit") {
    CHECK(extract_snippet("Alpha beta. Gamma delta. Done.", 5) == "Alpha beta. Gamma delta. Done.");
  }

  TEST_CASE("abbreviations do not end a sentence") {
    CHECK(extract_snippet("He met Dr. Smith. It rained.", 1) == "He met Dr. Smith.");
  }

  TEST_CASE("decimals do not end a sentence") {
    CHECK(split_sentences("Prices rose 3.5 percent. Then fell.").size() == 2);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(extract_snippet("x", 0), Error);
    CHECK_THROWS_AS(extract_snippet("   ", 3), Error);
  }
}

TEST_SUITE("keyword groups") {
  TEST_CASE("most hits wins") {
    const auto c = window_config();
    CHECK(assign_keyword_group("the election votes were counted", c.groups) == "elections");
  }

  TEST_CASE("no hits") {
    const auto c = window_config();
    CHECK_FALSE(assign_keyword_group("a quiet day at the harbor", c.groups).has_value());
  }

  TEST_CASE("ties go to the first group") {
    const auto c = window_config();
    CHECK(assign_keyword_group("vote on the vaccine", c.groups) == "elections");
  }

  TEST_CASE("invalid groups") {
    std::vector<KeywordGroup> dup = {{"a", "A", {"x"}}, {"a", "B", {"y"}}};
    CHECK_THROWS_AS(validate_groups(dup), Error);
    std::vector<KeywordGroup> empty = {{"a", "A", {}}};
    CHECK_THROWS_AS(validate_groups(empty), Error);
  }
}

TEST_SUITE("feeds") {
  TEST_CASE("three item fixture") {
    const auto xml = testing::slurp(testing::fixture_dir() / "feeds" / "three_items.xml");
    const auto feed = parse_feed(xml, "https://harbor.example.com/rss");
    CHECK(feed.title == "Harbor Daily");
    REQUIRE(feed.articles.size() == 3);
    CHECK(feed.articles[0].title == "Council approves new flood barrier");
    CHECK(feed.articles[0].link == "https://harbor.example.com/news/flood-barrier");
    CHECK(feed.articles[0].published_at == make_timestamp(2023, 5, 16, 8, 30));
    CHECK(feed.articles[1].body_text.rfind("The community clinic", 0) == 0);
    CHECK(feed.articles[2].published_at == make_timestamp(2023, 7, 21, 17, 45));
  }

  TEST_CASE("parsing is deterministic") {
    const auto xml = testing::slurp(testing::fixture_dir() / "feeds" / "three_items.xml");
    CHECK(parse_feed(xml, "u").articles == parse_feed(xml, "u").articles);
  }

  TEST_CASE("empty feed") {
    const auto xml = testing::slurp(testing::fixture_dir() / "feeds" / "empty.xml");
    CHECK(parse_feed(xml, "u").articles.empty());
  }

  TEST_CASE("truncated feed is a parse error with an offset") {
    const auto xml = testing::slurp(testing::fixture_dir() / "feeds" / "truncated.xml");
    CHECK_THROWS_AS(parse_feed(xml, "u"), ParseError);
  }

  TEST_CASE("atom feeds") {
    const std::string atom = R"(<?xml version="1.0"?>
<feed xmlns="http://www.w3.org/2005/Atom">
  <title>Atom Wire</title>
  <entry>
    <title>Entry</title>
    <link href="https://atom.example.com/1"/>
    <updated>2023-06-01T12:00:00Z</updated>
    <author><name>Atom Desk</name></author>
    <summary>Short summary here.</summary>
  </entry>
</feed>)";
    const auto feed = parse_feed(atom, "https://atom.example.com/feed");
    REQUIRE(feed.articles.size() == 1);
    CHECK(feed.articles[0].link == "https://atom.example.com/1");
    CHECK(feed.articles[0].source == "Atom Desk");
    CHECK(feed.articles[0].published_at == make_timestamp(2023, 6, 1, 12));
  }

  TEST_CASE("not a feed") {
    CHECK_THROWS_AS(parse_feed("<html><body/></html>", "u"), ParseError);
  }

  TEST_CASE("fixture transport") {
    FixtureTransport t;
    t.add("https://harbor.example.com/rss", testing::fixture_dir() / "feeds" / "three_items.xml");
    CHECK(fetch_feed("https://harbor.example.com/rss", std::chrono::seconds(1), t).size() == 3);
    try {
      t.get("https://unknown.example.com/", std::chrono::seconds(1));
      FAIL("expected a transport error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::transport);
      CHECK(e.retriable());
    }
  }

  TEST_CASE("concurrent fetch keeps input order") {
    FixtureTransport t;
    t.add("https://a.example.com/rss", testing::fixture_dir() / "feeds" / "three_items.xml");
    t.add("https://b.example.com/rss", testing::fixture_dir() / "feeds" / "empty.xml");
    const auto results = fetch_feeds(
        {"https://b.example.com/rss", "https://missing.example.com/rss", "https://a.example.com/rss", "not a url"},
        std::chrono::seconds(1), t);
    REQUIRE(results.size() == 4);
    CHECK(results[0].feed_url == "https://b.example.com/rss");
    CHECK(results[0].articles.empty());
    CHECK_FALSE(results[0].error.has_value());
    CHECK(results[1].error.has_value());
    CHECK_FALSE(results[2].error.has_value());
    CHECK(results[2].articles.size() == 3);
    CHECK(results[3].error.has_value());
  }
}

TEST_SUITE("records") {
  TEST_CASE("articles become scrubbed snippet records") {
    const auto xml = testing::slurp(testing::fixture_dir() / "feeds" / "three_items.xml");
    const auto feed = parse_feed(xml, "https://harbor.example.com/rss");
    auto cfg = window_config();
    cfg.groups = {{"infra", "Infrastructure", {"bridge", "flood barrier"}}};
    IngestStats stats;
    const auto out = articles_to_records(feed.articles, {"https://harbor.example.com/rss", {}, {}}, feed.title, cfg,
                                         &stats);
    REQUIRE(out.size() == 3);
    CHECK(stats.entries == 3);
    CHECK(out[0].dataset == "Harbor Daily");
    CHECK(out[0].id == record_id_for_link("https://harbor.example.com/news/flood-barrier"));
    CHECK(out[0].keyword_group == "infra");
    CHECK_FALSE(out[1].keyword_group.has_value());
    for (const auto& r : out) CHECK_FALSE(contains_pii(r.text));
  }

  TEST_CASE("entries without body are skipped by default") {
    RawArticle a;
    a.title = "Only a title";
    a.link = "https://x.example.com/1";
    a.published_at = make_timestamp(2023, 6, 1);
    auto cfg = window_config();
    IngestStats stats;
    CHECK(articles_to_records(std::vector{a}, {"u", {}, {}}, "T", cfg, &stats).empty());
    CHECK(stats.skipped_no_body == 1);
    cfg.keep_title_only = true;
    const auto kept = articles_to_records(std::vector{a}, {"u", {}, {}}, "T", cfg);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].text == "Only a title");
  }
}

TEST_SUITE("consolidate") {
  TEST_CASE("benchmark keeps the earliest records, undated last") {
    auto cfg = window_config();
    cfg.benchmark_limit = 3;
    Corpus bench = {rec("late", "late text", make_timestamp(2022, 9, 1)), rec("undated", "no date"),
                    rec("early", "early text", make_timestamp(2020, 1, 1)),
                    rec("mid", "mid text", make_timestamp(2021, 5, 1))};
    const auto out = consolidate({}, bench, cfg);
    REQUIRE(out.size() == 3);
    CHECK(out[0].id == "early");
    CHECK(out[1].id == "mid");
    CHECK(out[2].id == "late");
  }

  TEST_CASE("curated records outside the window are dropped") {
    auto cfg = window_config();
    Corpus curated = {rec("in", "inside", make_timestamp(2023, 5, 1)), rec("out", "outside", make_timestamp(2023, 1, 1)),
                      rec("edge", "edge", cfg.window_end)};
    const auto out = consolidate(curated, {}, cfg);
    REQUIRE(out.size() == 2);
    CHECK(out[0].id == "in");
    CHECK(out[1].id == "edge");
  }

  TEST_CASE("duplicate text keeps the first occurrence") {
    auto cfg = window_config();
    Corpus curated = {rec("a", "Same  Text", make_timestamp(2023, 5, 1)), rec("b", "same text", make_timestamp(2023, 5, 2))};
    Corpus bench = {rec("c", "SAME TEXT", make_timestamp(2020, 1, 1))};
    const auto out = consolidate(curated, bench, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].id == "a");
  }

  TEST_CASE("colliding ids get a suffix") {
    auto cfg = window_config();
    Corpus curated = {rec("x", "one", make_timestamp(2023, 5, 1)), rec("x", "two", make_timestamp(2023, 5, 2))};
    const auto out = consolidate(curated, {}, cfg);
    REQUIRE(out.size() == 2);
    CHECK(out[0].id != out[1].id);
  }

  TEST_CASE("nothing survives") {
    CHECK_THROWS_AS(consolidate({}, {}, window_config()), Error);
  }
}

TEST_SUITE("config") {
  TEST_CASE("parses the documented format") {
    std::istringstream in(R"(# comment
max_sentences = 4
window_start = 2023-04-20T00:00:00Z
window_end = 2023-10-20T00:00:00Z
benchmark_limit = 100
group.vote.name = Voting
group.vote.keywords = ballot, polling station
feed = https://a.example.com/rss group=vote fixture=a.xml
)");
    const auto c = parse_ingest_config(in, "/base");
    CHECK(c.max_sentences == 4);
    CHECK(c.benchmark_limit == 100);
    REQUIRE(c.groups.size() == 1);
    CHECK(c.groups[0].name == "Voting");
    CHECK(c.groups[0].keywords == std::vector<std::string>{"ballot", "polling station"});
    REQUIRE(c.feeds.size() == 1);
    CHECK(c.feeds[0].group_id == "vote");
    CHECK(c.feeds[0].fixture == std::filesystem::path("/base/a.xml"));
  }

  TEST_CASE("empty window is rejected") {
    std::istringstream in("window_start = 2023-10-20T00:00:00Z\nwindow_end = 2023-04-20T00:00:00Z\n"
                          "group.a.name = A\ngroup.a.keywords = x\n");
    CHECK_THROWS_AS(validate(parse_ingest_config(in)), Error);
  }

  TEST_CASE("unknown keys are rejected") {
    std::istringstream in("colour = blue\n");
    CHECK_THROWS_AS(parse_ingest_config(in), Error);
  }

  TEST_CASE("shipped default config loads") {
    const auto c = load_ingest_config(std::filesystem::path(NEWSHUB_SOURCE_DIR) / "config" / "ingest.conf");
    CHECK_NOTHROW(validate(c));
    CHECK(c.max_sentences == 5);
    CHECK(c.benchmark_limit == 5000);
    CHECK_FALSE(c.groups.empty());
  }
}

TEST_CASE("offline ingest run reports the broken feed and keeps going") {
  const auto cfg = load_ingest_config(testing::fixture_dir() / "pipeline" / "ingest.conf");
  auto transport = pipeline::fixture_transport(cfg);
  const auto run = pipeline::run_ingest(cfg, {}, transport);
  REQUIRE(run.feeds.size() == 4);
  CHECK(run.feeds[0].records == 3);
  CHECK(run.feeds[2].records == 0);
  CHECK(run.feeds[3].error.has_value());
  CHECK(run.corpus.size() == 51);
}
