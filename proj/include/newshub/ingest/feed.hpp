#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newshub/time.hpp"

namespace newshub::ingest {

struct RawArticle {
  std::string feed_url;
  std::string title;
  std::string link;
  std::optional<Timestamp> published_at;
  std::string body_text;
  // Publisher named by the entry (<source> in RSS, <author><name> in Atom).
  std::string source;

  // Entry had no parseable publication date.
  bool missing_date = false;
  // Entry link is not a syntactically valid URL.
  bool invalid_link = false;

  bool operator==(const RawArticle&) const = default;
};

struct ParsedFeed {
  std::string title;
  std::vector<RawArticle> articles;
};

// scheme://host[...] with a non-empty host; scheme is http, https or file.
bool is_valid_url(std::string_view url);

// Parses RSS 2.0, RSS 1.0 (RDF) or Atom. Entries keep document order.
// Throws ParseError carrying the byte offset for malformed XML or a document
// that is not a feed.
ParsedFeed parse_feed(std::string_view xml, const std::string& feed_url);

// Byte source for feeds.
class FeedTransport {
 public:
  virtual ~FeedTransport() = default;
  // Throws Error(Errc::transport) for connection failures and UpstreamError
  // for HTTP status >= 400.
  virtual std::string get(const std::string& url, std::chrono::milliseconds timeout) = 0;
};

// Plain HTTP(S) client.
class HttpTransport : public FeedTransport {
 public:
  std::string get(const std::string& url, std::chrono::milliseconds timeout) override;
};

// Offline transport: file:// URLs are read directly, other URLs through an
// explicit url -> path map. Unknown URLs are a transport error.
class FixtureTransport : public FeedTransport {
 public:
  FixtureTransport() = default;
  explicit FixtureTransport(std::map<std::string, std::filesystem::path> fixtures)
      : fixtures_(std::move(fixtures)) {}

  void add(std::string url, std::filesystem::path path) {
    fixtures_[std::move(url)] = std::move(path);
  }

  std::string get(const std::string& url, std::chrono::milliseconds timeout) override;

 private:
  std::map<std::string, std::filesystem::path> fixtures_;
};

std::vector<RawArticle> fetch_feed(const std::string& feed_url, std::chrono::milliseconds timeout,
                                   FeedTransport& transport);

struct FeedFetchResult {
  std::string feed_url;
  std::vector<RawArticle> articles;
  std::optional<std::string> error;
};

// Fetches every feed concurrently. Results come back in input order so the
// merge is deterministic regardless of completion order. The transport must
// be safe to call from several threads.
std::vector<FeedFetchResult> fetch_feeds(const std::vector<std::string>& feed_urls,
                                         std::chrono::milliseconds timeout,
                                         FeedTransport& transport);

}  // namespace newshub::ingest
