#include "newshub/ingest/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "newshub/error.hpp"
#include "newshub/hash.hpp"

namespace newshub::ingest {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_count(const std::string& key, const std::string& value, std::size_t line) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size() || v < 1) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(Errc::config, "line " + std::to_string(line) + ": " + key +
                                  " must be a positive integer, got '" + value + "'");
  }
}

Timestamp parse_time_setting(const std::string& key, const std::string& value, std::size_t line) {
  auto ts = parse_timestamp(value);
  if (!ts)
    throw Error(Errc::config, "line " + std::to_string(line) + ": " + key +
                                  " is not an RFC-3339 timestamp: '" + value + "'");
  return *ts;
}

bool parse_bool(const std::string& key, const std::string& value, std::size_t line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(Errc::config, "line " + std::to_string(line) + ": " + key + " must be true/false");
}

std::vector<std::string> split_keywords(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string kw = trim(item);
    for (char& c : kw) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(kw);
  }
  return out;
}

std::string host_of(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos) return std::string(url);
  auto rest = url.substr(sep + 3);
  return std::string(rest.substr(0, rest.find_first_of("/?#")));
}

void check_record(const ConsolidatedRecord& rec, const char* side) {
  if (trim(rec.text).empty())
    throw Error(Errc::input, std::string(side) + " record " + rec.id + " has empty text");
  if (contains_pii(rec.text))
    throw Error(Errc::input, std::string(side) + " record " + rec.id + " still contains PII");
}

}  // namespace

void validate(const IngestConfig& config) {
  if (config.max_sentences < 1) throw Error(Errc::config, "max_sentences must be >= 1");
  if (!(config.window_start < config.window_end))
    throw Error(Errc::config, "window_start must be before window_end");
  if (config.benchmark_limit < 1) throw Error(Errc::config, "benchmark_limit must be >= 1");
  validate_groups(config.groups);
  std::set<std::string> ids;
  for (const auto& g : config.groups) ids.insert(g.id);
  for (const auto& f : config.feeds) {
    if (!is_valid_url(f.url)) throw Error(Errc::config, "invalid feed URL '" + f.url + "'");
    if (f.group_id && !ids.count(*f.group_id))
      throw Error(Errc::config, "feed " + f.url + " names unknown group '" + *f.group_id + "'");
  }
}

IngestConfig parse_ingest_config(std::istream& in, const std::filesystem::path& base_dir) {
  IngestConfig cfg;
  bool have_start = false, have_end = false;
  std::string raw;
  std::size_t line_no = 0;
  auto group = [&cfg](const std::string& id) -> KeywordGroup& {
    for (auto& g : cfg.groups)
      if (g.id == id) return g;
    cfg.groups.push_back(KeywordGroup{id, id, {}});
    return cfg.groups.back();
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config, "line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "max_sentences") {
      cfg.max_sentences = parse_count(key, value, line_no);
    } else if (key == "benchmark_limit") {
      cfg.benchmark_limit = parse_count(key, value, line_no);
    } else if (key == "window_start") {
      cfg.window_start = parse_time_setting(key, value, line_no);
      have_start = true;
    } else if (key == "window_end") {
      cfg.window_end = parse_time_setting(key, value, line_no);
      have_end = true;
    } else if (key == "keep_title_only") {
      cfg.keep_title_only = parse_bool(key, value, line_no);
    } else if (key.rfind("group.", 0) == 0) {
      auto dot = key.rfind('.');
      std::string id = key.substr(6, dot - 6);
      std::string field = key.substr(dot + 1);
      if (id.empty() || dot <= 6)
        throw Error(Errc::config, "line " + std::to_string(line_no) + ": malformed group key");
      if (field == "name") group(id).name = value;
      else if (field == "keywords") group(id).keywords = split_keywords(value);
      else throw Error(Errc::config, "line " + std::to_string(line_no) + ": unknown group field '" + field + "'");
    } else if (key == "feed") {
      std::stringstream ss(value);
      FeedSpec spec;
      ss >> spec.url;
      std::string opt;
      while (ss >> opt) {
        if (opt.rfind("group=", 0) == 0) {
          spec.group_id = opt.substr(6);
        } else if (opt.rfind("fixture=", 0) == 0) {
          std::filesystem::path p = opt.substr(8);
          spec.fixture = p.is_absolute() ? p : base_dir / p;
        } else {
          throw Error(Errc::config, "line " + std::to_string(line_no) + ": unknown feed option '" + opt + "'");
        }
      }
      cfg.feeds.push_back(std::move(spec));
    } else {
      throw Error(Errc::config, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!have_start || !have_end) throw Error(Errc::config, "window_start and window_end are required");
  validate(cfg);
  return cfg;
}

IngestConfig load_ingest_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path.string());
  return parse_ingest_config(in, path.parent_path());
}

std::string record_id_for_link(std::string_view link) { return "rss-" + fnv1a_hex(link); }

Corpus articles_to_records(std::span<const RawArticle> articles, const FeedSpec& feed,
                           const std::string& feed_title, const IngestConfig& config,
                           IngestStats* stats) {
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  Corpus out;
  for (const auto& a : articles) {
    ++st.entries;
    if (a.missing_date) ++st.missing_date;
    if (a.invalid_link) {
      ++st.skipped_bad_link;
      continue;
    }
    std::string body = a.body_text;
    if (trim(body).empty()) {
      if (!config.keep_title_only || trim(a.title).empty()) {
        ++st.skipped_no_body;
        continue;
      }
      body = a.title;
    }
    ConsolidatedRecord rec;
    rec.id = record_id_for_link(a.link);
    rec.dataset = !a.source.empty() ? a.source : !feed_title.empty() ? feed_title : host_of(feed.url);
    rec.text = scrub_pii(extract_snippet(body, config.max_sentences));
    if (trim(rec.text).empty()) {
      ++st.skipped_no_body;
      continue;
    }
    rec.url = a.link;
    rec.published_at = a.published_at;
    if (feed.group_id) {
      rec.keyword_group = feed.group_id;
    } else if (!config.groups.empty()) {
      rec.keyword_group = assign_keyword_group(rec.text, config.groups);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

Corpus scrub_records(Corpus records, std::size_t* dropped) {
  Corpus out;
  out.reserve(records.size());
  std::size_t n_dropped = 0;
  for (auto& rec : records) {
    rec.text = scrub_pii(rec.text);
    if (trim(rec.text).empty()) {
      ++n_dropped;
      continue;
    }
    out.push_back(std::move(rec));
  }
  if (dropped) *dropped = n_dropped;
  return out;
}

Corpus consolidate(const Corpus& curated, const Corpus& benchmark, const IngestConfig& config) {
  for (const auto& r : curated) check_record(r, "curated");
  for (const auto& r : benchmark) check_record(r, "benchmark");

  std::vector<const ConsolidatedRecord*> bench;
  bench.reserve(benchmark.size());
  for (const auto& r : benchmark) bench.push_back(&r);
  std::stable_sort(bench.begin(), bench.end(), [](const auto* a, const auto* b) {
    if (a->published_at && b->published_at) return *a->published_at < *b->published_at;
    return a->published_at.has_value() && !b->published_at.has_value();
  });
  if (bench.size() > config.benchmark_limit) bench.resize(config.benchmark_limit);

  Corpus out;
  std::unordered_set<std::string> seen_text;
  std::unordered_set<std::string> seen_id;
  auto admit = [&](const ConsolidatedRecord& r) {
    if (!seen_text.insert(normalize_for_dedup(r.text)).second) return;
    ConsolidatedRecord copy = r;
    if (!seen_id.insert(copy.id).second) {
      for (int n = 2;; ++n) {
        std::string candidate = r.id + "~" + std::to_string(n);
        if (seen_id.insert(candidate).second) {
          copy.id = std::move(candidate);
          break;
        }
      }
    }
    out.push_back(std::move(copy));
  };
  for (const auto& r : curated) {
    if (!r.published_at) continue;
    if (*r.published_at < config.window_start || config.window_end < *r.published_at) continue;
    admit(r);
  }
  for (const auto* r : bench) admit(*r);
  if (out.empty()) throw Error(Errc::empty_corpus, "no records survived consolidation");
  return out;
}

}  // namespace newshub::ingest
