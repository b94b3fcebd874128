#include "newshub/ingest/feed.hpp"

#include <expat.h>

#include <fstream>
#include <future>
#include <sstream>

#include "newshub/error.hpp"
#include "newshub/ingest/text.hpp"

namespace newshub::ingest {

bool is_valid_url(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return false;
  std::string scheme;
  for (char c : url.substr(0, sep)) scheme.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (scheme != "http" && scheme != "https" && scheme != "file") return false;
  std::string_view rest = url.substr(sep + 3);
  for (char c : rest) {
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  }
  if (scheme == "file") return !rest.empty();
  auto host_end = rest.find_first_of("/?#");
  std::string_view host = rest.substr(0, host_end);
  if (auto at = host.rfind('@'); at != std::string_view::npos) host = host.substr(at + 1);
  if (auto colon = host.rfind(':'); colon != std::string_view::npos) host = host.substr(0, colon);
  return !host.empty();
}

namespace {

enum class FeedKind { unknown, rss, atom };

struct EntryFields {
  std::string title;
  std::string link;
  std::string link_text;
  std::string pub_date;
  std::string iso_date;
  std::string description;
  std::string content_encoded;
  std::string content;
  std::string summary;
  std::string source;
  std::string author;
};

struct ParseState {
  std::string feed_url;
  FeedKind kind = FeedKind::unknown;
  int depth = 0;
  int item_depth = -1;       // depth of the current <item>/<entry>, -1 outside
  std::string field;         // name of the item child being read
  std::string feed_title;
  bool in_feed_title = false;
  int feed_title_depth = -1;
  EntryFields entry;
  std::vector<RawArticle> articles;

  bool failed = false;
  std::string failure;
  std::size_t failure_offset = 0;
  XML_Parser parser = nullptr;
};

// Local part of a possibly prefixed element name.
std::string_view local_name(std::string_view name) {
  auto colon = name.rfind(':');
  return colon == std::string_view::npos ? name : name.substr(colon + 1);
}

const char* find_attr(const XML_Char** attrs, std::string_view key) {
  for (int i = 0; attrs[i]; i += 2) {
    if (key == attrs[i]) return attrs[i + 1];
  }
  return nullptr;
}

void finish_entry(ParseState& st) {
  EntryFields& e = st.entry;
  RawArticle a;
  a.feed_url = st.feed_url;
  a.title = strip_html(e.title);
  a.link = e.link.empty() ? strip_html(e.link_text) : e.link;
  a.source = strip_html(!e.source.empty() ? e.source : e.author);
  if (!e.pub_date.empty()) a.published_at = parse_timestamp(strip_html(e.pub_date));
  if (!a.published_at && !e.iso_date.empty()) a.published_at = parse_timestamp(strip_html(e.iso_date));
  a.missing_date = !a.published_at.has_value();
  const std::string* body = &e.content_encoded;
  if (body->empty()) body = &e.description;
  if (body->empty()) body = &e.content;
  if (body->empty()) body = &e.summary;
  a.body_text = strip_html(*body);
  a.invalid_link = !is_valid_url(a.link);
  st.articles.push_back(std::move(a));
  st.entry = EntryFields{};
}

void XMLCALL on_start(void* user, const XML_Char* name_c, const XML_Char** attrs) {
  auto& st = *static_cast<ParseState*>(user);
  if (st.failed) return;
  std::string_view name(name_c);
  std::string_view local = local_name(name);
  ++st.depth;
  if (st.depth == 1) {
    if (local == "rss" || local == "RDF") {
      st.kind = FeedKind::rss;
    } else if (local == "feed") {
      st.kind = FeedKind::atom;
    } else {
      st.failed = true;
      st.failure = "document root <" + std::string(name) + "> is not a feed";
      st.failure_offset = static_cast<std::size_t>(XML_GetCurrentByteIndex(st.parser));
      XML_StopParser(st.parser, XML_FALSE);
    }
    return;
  }
  if (st.item_depth < 0) {
    bool is_entry = (st.kind == FeedKind::rss && local == "item") ||
                    (st.kind == FeedKind::atom && local == "entry");
    if (is_entry) {
      st.item_depth = st.depth;
      return;
    }
    // Channel title: <rss><channel><title> or <feed><title>.
    int title_depth = st.kind == FeedKind::rss ? 3 : 2;
    if (local == "title" && st.depth == title_depth && st.feed_title.empty()) {
      st.in_feed_title = true;
      st.feed_title_depth = st.depth;
    }
    return;
  }
  if (st.depth == st.item_depth + 1) {
    st.field = std::string(name);
    if (st.kind == FeedKind::atom && local == "link") {
      const char* href = find_attr(attrs, "href");
      const char* rel = find_attr(attrs, "rel");
      bool alternate = !rel || std::string_view(rel) == "alternate";
      if (href && alternate && st.entry.link.empty()) st.entry.link = href;
    }
  }
}

void XMLCALL on_end(void* user, const XML_Char*) {
  auto& st = *static_cast<ParseState*>(user);
  if (st.failed) return;
  if (st.in_feed_title && st.depth == st.feed_title_depth) st.in_feed_title = false;
  if (st.item_depth >= 0) {
    if (st.depth == st.item_depth) {
      finish_entry(st);
      st.item_depth = -1;
    } else if (st.depth == st.item_depth + 1) {
      st.field.clear();
    }
  }
  --st.depth;
}

void XMLCALL on_text(void* user, const XML_Char* s, int len) {
  auto& st = *static_cast<ParseState*>(user);
  if (st.failed) return;
  std::string_view text(s, static_cast<std::size_t>(len));
  if (st.in_feed_title) {
    st.feed_title.append(text);
    return;
  }
  if (st.item_depth < 0 || st.field.empty()) return;
  std::string_view local = local_name(st.field);
  EntryFields& e = st.entry;
  if (local == "title") e.title.append(text);
  else if (local == "link") e.link_text.append(text);
  else if (local == "pubDate") e.pub_date.append(text);
  else if (local == "date" || local == "published") e.iso_date.append(text);
  else if (local == "updated") {
    if (e.iso_date.empty()) e.iso_date.append(text);
  }
  else if (st.field == "content:encoded") e.content_encoded.append(text);
  else if (local == "description") e.description.append(text);
  else if (local == "content") e.content.append(text);
  else if (local == "summary") e.summary.append(text);
  else if (local == "source") e.source.append(text);
  else if (local == "author" || local == "creator") e.author.append(text);
}

}  // namespace

ParsedFeed parse_feed(std::string_view xml, const std::string& feed_url) {
  XML_Parser parser = XML_ParserCreate(nullptr);
  if (!parser) throw Error(Errc::parse, "cannot allocate XML parser");
  ParseState st;
  st.feed_url = feed_url;
  st.parser = parser;
  XML_SetUserData(parser, &st);
  XML_SetElementHandler(parser, on_start, on_end);
  XML_SetCharacterDataHandler(parser, on_text);

  XML_Status status = XML_Parse(parser, xml.data(), static_cast<int>(xml.size()), XML_TRUE);
  if (st.failed) {
    XML_ParserFree(parser);
    throw ParseError(st.failure_offset, feed_url + ": " + st.failure);
  }
  if (status != XML_STATUS_OK) {
    auto offset = static_cast<std::size_t>(XML_GetCurrentByteIndex(parser));
    std::string msg = XML_ErrorString(XML_GetErrorCode(parser));
    XML_ParserFree(parser);
    throw ParseError(offset, feed_url + ": malformed XML: " + msg);
  }
  XML_ParserFree(parser);
  return ParsedFeed{strip_html(st.feed_title), std::move(st.articles)};
}

std::string FixtureTransport::get(const std::string& url, std::chrono::milliseconds) {
  std::filesystem::path path;
  if (auto it = fixtures_.find(url); it != fixtures_.end()) {
    path = it->second;
  } else if (url.rfind("file://", 0) == 0) {
    path = url.substr(7);
  } else {
    throw Error(Errc::transport, "no fixture registered for " + url);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::transport, "cannot read fixture " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<RawArticle> fetch_feed(const std::string& feed_url, std::chrono::milliseconds timeout,
                                   FeedTransport& transport) {
  if (!is_valid_url(feed_url)) throw Error(Errc::input, "invalid feed URL '" + feed_url + "'");
  std::string body = transport.get(feed_url, timeout);
  return parse_feed(body, feed_url).articles;
}

std::vector<FeedFetchResult> fetch_feeds(const std::vector<std::string>& feed_urls,
                                         std::chrono::milliseconds timeout,
                                         FeedTransport& transport) {
  std::vector<std::future<std::vector<RawArticle>>> pending;
  pending.reserve(feed_urls.size());
  for (const auto& url : feed_urls) {
    pending.push_back(std::async(std::launch::async, [&transport, url, timeout] {
      return fetch_feed(url, timeout, transport);
    }));
  }
  std::vector<FeedFetchResult> out;
  out.reserve(feed_urls.size());
  for (std::size_t i = 0; i < feed_urls.size(); ++i) {
    FeedFetchResult r;
    r.feed_url = feed_urls[i];
    try {
      r.articles = pending[i].get();
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace newshub::ingest
