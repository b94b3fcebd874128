#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newshub/ingest/feed.hpp"
#include "newshub/ingest/text.hpp"
#include "newshub/record.hpp"

namespace newshub::ingest {

struct FeedSpec {
  std::string url;
  std::optional<std::string> group_id;
  // Offline stand-in for the URL, resolved relative to the config file.
  std::optional<std::filesystem::path> fixture;
};

struct IngestConfig {
  std::size_t max_sentences = 5;
  Timestamp window_start;
  Timestamp window_end;
  std::size_t benchmark_limit = 5000;
  std::vector<FeedSpec> feeds;
  std::vector<KeywordGroup> groups;
  // When false, entries without body text are skipped (and counted).
  bool keep_title_only = false;
};

// Throws Error(Errc::config) when the window is empty or max_sentences == 0,
// and for keyword-group or feed problems.
void validate(const IngestConfig& config);

// Key/value config format, one setting per line, '#' comments:
//
//   max_sentences   = 5
//   window_start    = 2023-04-20T00:00:00Z
//   window_end      = 2023-10-20T00:00:00Z
//   benchmark_limit = 5000
//   keep_title_only = false
//   group.<id>.name     = Display name
//   group.<id>.keywords = phrase one, phrase two
//   feed = <url> [group=<id>] [fixture=<path>]
//
// Group order follows first appearance in the file.
IngestConfig parse_ingest_config(std::istream& in, const std::filesystem::path& base_dir = {});
IngestConfig load_ingest_config(const std::filesystem::path& path);

struct IngestStats {
  std::size_t entries = 0;
  std::size_t skipped_no_body = 0;
  std::size_t skipped_bad_link = 0;
  std::size_t missing_date = 0;
};

// Stable record id derived from the article link.
std::string record_id_for_link(std::string_view link);

// Turns feed articles into scrubbed snippet records. The dataset tag is the
// entry's publisher, else the feed title, else the feed host.
Corpus articles_to_records(std::span<const RawArticle> articles, const FeedSpec& feed,
                           const std::string& feed_title, const IngestConfig& config,
                           IngestStats* stats = nullptr);

// Benchmark records sorted by date (undated last, stable) and truncated to
// benchmark_limit; curated records restricted to the inclusive window;
// duplicates by normalized text dropped (first occurrence wins, curated
// before benchmark). Colliding ids get a "~N" suffix. Throws
// Error(Errc::empty_corpus) when nothing survives.
Corpus consolidate(const Corpus& curated, const Corpus& benchmark, const IngestConfig& config);

// Scrubs PII from text and drops records whose text ends up blank.
Corpus scrub_records(Corpus records, std::size_t* dropped = nullptr);

}  // namespace newshub::ingest
