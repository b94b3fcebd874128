#include "newshub/ingest/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "newshub/error.hpp"

namespace newshub::ingest {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

// Non-ASCII bytes count as word characters so UTF-8 words stay whole.
bool is_word_byte(char c) {
  return is_alnum(c) || static_cast<unsigned char>(c) >= 0x80;
}

std::vector<std::string> lower_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (is_word_byte(c)) {
      cur.push_back(lower(c));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

bool word_matches(const std::string& text_word, const std::string& kw, bool allow_plural) {
  if (text_word == kw) return true;
  if (!allow_plural || text_word.size() <= kw.size()) return false;
  if (text_word.compare(0, kw.size(), kw) != 0) return false;
  std::string_view suffix(text_word.data() + kw.size(), text_word.size() - kw.size());
  return suffix == "s" || suffix == "es";
}

std::size_t count_hits(const std::vector<std::string>& words,
                       const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > words.size()) return 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i + phrase.size() <= words.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < phrase.size() && ok; ++k) {
      ok = word_matches(words[i + k], phrase[k], k + 1 == phrase.size());
    }
    if (ok) ++hits;
  }
  return hits;
}

std::string collapse_trim(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

constexpr std::array<std::string_view, 6> kAbbreviations{"Mr.", "Mrs.", "Dr.", "U.S.", "St.", "vs."};

// The '.' at `pos` closes one of the protected abbreviations that starts at
// a word boundary.
bool protected_period(std::string_view text, std::size_t pos) {
  for (auto abbr : kAbbreviations) {
    if (pos + 1 < abbr.size()) continue;
    std::size_t start = pos + 1 - abbr.size();
    if (text.substr(start, abbr.size()) != abbr) continue;
    if (start == 0 || !is_word_byte(text[start - 1])) return true;
  }
  return false;
}

struct Span {
  std::size_t begin;
  std::size_t end;
};

bool is_scheme_char(char c) { return is_alnum(c) || c == '+' || c == '.' || c == '-'; }
bool is_trailing_punct(char c) {
  return std::string_view(".,;:!?)]}'\"").find(c) != std::string_view::npos;
}

std::size_t url_body_end(std::string_view text, std::size_t from) {
  std::size_t end = from;
  while (end < text.size() && !is_space(text[end])) ++end;
  while (end > from && is_trailing_punct(text[end - 1])) --end;
  return end;
}

bool starts_with_www(std::string_view text, std::size_t i) {
  if (i + 4 > text.size()) return false;
  return lower(text[i]) == 'w' && lower(text[i + 1]) == 'w' && lower(text[i + 2]) == 'w' &&
         text[i + 3] == '.';
}

// URL spans: "<scheme>://<non-space>*" or "www.<non-space>*" at a word start,
// with trailing punctuation left outside the span.
std::vector<Span> find_urls(std::string_view text) {
  std::vector<Span> candidates;
  for (std::size_t q = text.find("://"); q != std::string_view::npos; q = text.find("://", q + 1)) {
    std::size_t r = q;
    while (r > 0 && is_scheme_char(text[r - 1])) --r;
    while (r < q && !is_alpha(text[r])) ++r;
    if (r == q) continue;
    candidates.push_back({r, url_body_end(text, q + 3)});
    if (candidates.back().end < q + 3) candidates.back().end = q + 3;
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (starts_with_www(text, i) && (i == 0 || !is_alnum(text[i - 1]))) {
      candidates.push_back({i, std::max(url_body_end(text, i + 4), i + 4)});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Span& a, const Span& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.end > b.end;
  });
  std::vector<Span> out;
  for (const auto& s : candidates) {
    if (!out.empty() && s.begin < out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
      continue;
    }
    out.push_back(s);
  }
  return out;
}

bool is_local_char(char c) {
  return is_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}
bool is_label_char(char c) { return is_alnum(c) || c == '-'; }
bool is_user_char(char c) { return is_alnum(c) || c == '_'; }

// local@label(.label)+ with at least one dot in the domain.
std::vector<Span> find_emails(std::string_view text) {
  std::vector<Span> out;
  std::size_t floor = 0;
  for (std::size_t at = text.find('@'); at != std::string_view::npos; at = text.find('@', at + 1)) {
    if (at < floor) continue;
    std::size_t begin = at;
    while (begin > floor && is_local_char(text[begin - 1])) --begin;
    if (begin == at) continue;
    std::size_t p = at + 1;
    std::size_t label_start = p;
    while (p < text.size() && is_label_char(text[p])) ++p;
    if (p == label_start) continue;
    std::size_t end = p;
    int dots = 0;
    while (p < text.size() && text[p] == '.') {
      std::size_t q = p + 1;
      while (q < text.size() && is_label_char(text[q])) ++q;
      if (q == p + 1) break;
      ++dots;
      end = p = q;
    }
    if (dots == 0) continue;
    out.push_back({begin, end});
    floor = end;
    at = end - 1;
  }
  return out;
}

std::vector<Span> find_usernames(std::string_view text) {
  std::vector<Span> out;
  for (std::size_t at = text.find('@'); at != std::string_view::npos; at = text.find('@', at + 1)) {
    std::size_t p = at + 1;
    while (p < text.size() && is_user_char(text[p])) ++p;
    if (p > at + 1) {
      out.push_back({at, p});
      at = p - 1;
    }
  }
  return out;
}

std::string replace_spans(std::string_view text, const std::vector<Span>& spans,
                          std::string_view placeholder) {
  if (spans.empty()) return std::string(text);
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  for (const auto& s : spans) {
    out.append(text.substr(pos, s.begin - pos));
    out.append(placeholder);
    pos = s.end;
  }
  out.append(text.substr(pos));
  return out;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

void validate_groups(std::span<const KeywordGroup> groups) {
  std::set<std::string> seen;
  for (const auto& g : groups) {
    if (g.id.empty()) throw Error(Errc::config, "keyword group with empty id");
    if (!seen.insert(g.id).second) throw Error(Errc::config, "duplicate keyword group id '" + g.id + "'");
    if (g.keywords.empty()) throw Error(Errc::config, "keyword group '" + g.id + "' has no keywords");
    for (const auto& kw : g.keywords) {
      if (collapse_trim(kw).empty())
        throw Error(Errc::config, "keyword group '" + g.id + "' has a blank keyword");
    }
  }
}

std::size_t count_phrase_hits(std::string_view text, std::string_view phrase) {
  return count_hits(lower_words(text), lower_words(phrase));
}

std::optional<std::string> assign_keyword_group(std::string_view text,
                                                std::span<const KeywordGroup> groups) {
  if (groups.empty()) throw Error(Errc::input, "no keyword groups configured");
  const auto words = lower_words(text);
  std::optional<std::string> best;
  std::size_t best_hits = 0;
  for (const auto& g : groups) {
    std::size_t hits = 0;
    for (const auto& kw : g.keywords) hits += count_hits(words, lower_words(kw));
    if (hits > best_hits) {
      best_hits = hits;
      best = g.id;
    }
  }
  return best;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  const std::size_t n = text.size();
  auto emit = [&](std::size_t end) {
    std::string s = collapse_trim(text.substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  for (std::size_t i = 0; i < n; ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (c == '.' && protected_period(text, i)) continue;
    std::size_t j = i + 1;
    while (j < n && is_space(text[j])) ++j;
    bool boundary = false;
    if (j == n) {
      boundary = true;
    } else if (j > i + 1 && is_upper(text[j])) {
      boundary = true;
    }
    if (boundary) emit(i + 1);
  }
  if (start < n) emit(n);
  return out;
}

std::string extract_snippet(std::string_view body_text, std::size_t max_sentences) {
  if (max_sentences == 0) throw Error(Errc::input, "max_sentences must be >= 1");
  auto sentences = split_sentences(body_text);
  if (sentences.empty()) throw Error(Errc::empty_input, "article body is empty");
  std::string out;
  std::size_t take = std::min(max_sentences, sentences.size());
  for (std::size_t i = 0; i < take; ++i) {
    if (i) out.push_back(' ');
    out += sentences[i];
  }
  return out;
}

std::string scrub_pii(std::string_view text) {
  std::string s = replace_spans(text, find_urls(text), kUrlPlaceholder);
  s = replace_spans(s, find_emails(s), kEmailPlaceholder);
  return replace_spans(s, find_usernames(s), kUserPlaceholder);
}

bool contains_pii(std::string_view text) {
  return !find_urls(text).empty() || !find_emails(text).empty() || !find_usernames(text).empty();
}

std::string strip_html(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  for (std::size_t i = 0; i < html.size(); ++i) {
    char c = html[i];
    if (c == '<') {
      std::size_t close = html.find('>', i);
      if (close == std::string_view::npos) break;
      // Block-level tags separate words.
      out.push_back(' ');
      i = close;
      continue;
    }
    if (c == '&') {
      std::size_t semi = html.find(';', i);
      if (semi != std::string_view::npos && semi - i <= 10) {
        std::string_view ent = html.substr(i + 1, semi - i - 1);
        std::string decoded;
        if (ent == "amp") decoded = "&";
        else if (ent == "lt") decoded = "<";
        else if (ent == "gt") decoded = ">";
        else if (ent == "quot") decoded = "\"";
        else if (ent == "apos" || ent == "#39") decoded = "'";
        else if (ent == "nbsp") decoded = " ";
        else if (ent.size() > 1 && ent[0] == '#') {
          unsigned long cp = 0;
          bool ok = true;
          bool hex = ent[1] == 'x' || ent[1] == 'X';
          for (std::size_t k = hex ? 2 : 1; k < ent.size() && ok; ++k) {
            char d = ent[k];
            if (hex && std::isxdigit(static_cast<unsigned char>(d)))
              cp = cp * 16 + static_cast<unsigned long>(std::isdigit(static_cast<unsigned char>(d)) ? d - '0' : lower(d) - 'a' + 10);
            else if (!hex && std::isdigit(static_cast<unsigned char>(d)))
              cp = cp * 10 + static_cast<unsigned long>(d - '0');
            else
              ok = false;
          }
          if (ok) append_utf8(decoded, cp);
        }
        if (!decoded.empty()) {
          out += decoded;
          i = semi;
          continue;
        }
      }
    }
    out.push_back(c);
  }
  return collapse_trim(out);
}

std::string normalize_for_dedup(std::string_view text) {
  std::string s = collapse_trim(text);
  for (char& c : s) c = lower(c);
  return s;
}

}  // namespace newshub::ingest
