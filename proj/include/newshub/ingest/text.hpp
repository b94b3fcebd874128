#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace newshub::ingest {

// Keyword group used to categorize articles (race/ethnicity terms, religious
// terms, ...). Keywords are stored lowercase.
struct KeywordGroup {
  std::string id;
  std::string name;
  std::vector<std::string> keywords;
};

// Throws Error(Errc::config) on empty keyword lists, blank keywords or
// duplicate ids.
void validate_groups(std::span<const KeywordGroup> groups);

// Id of the group with the most case-insensitive whole-phrase hits. The last
// word of a phrase also matches its plural ("vote" hits "votes"). Ties go to
// the earlier group; no hits -> nullopt.
std::optional<std::string> assign_keyword_group(std::string_view text,
                                                std::span<const KeywordGroup> groups);

// Number of phrase hits for a single keyword, same matching rule.
std::size_t count_phrase_hits(std::string_view text, std::string_view phrase);

// Sentence splitter. A boundary is '.', '!' or '?' followed by whitespace and
// then an uppercase letter, or by end of text. "Mr.", "Mrs.", "Dr.", "U.S.",
// "St." and "vs." never end a sentence. Sentences are trimmed with inner
// whitespace runs collapsed to one space.
std::vector<std::string> split_sentences(std::string_view text);

// First max_sentences sentences joined with single spaces. Throws
// Error(Errc::empty_input) for blank text, Error(Errc::input) for
// max_sentences == 0.
std::string extract_snippet(std::string_view body_text, std::size_t max_sentences);

inline constexpr std::string_view kUrlPlaceholder = "[URL]";
inline constexpr std::string_view kEmailPlaceholder = "[EMAIL]";
inline constexpr std::string_view kUserPlaceholder = "[USER]";

// Replaces URLs, then emails, then @usernames with fixed placeholders.
// Idempotent.
std::string scrub_pii(std::string_view text);

// True when any of the scrub_pii patterns still matches somewhere in text.
bool contains_pii(std::string_view text);

// Removes markup tags and decodes the common HTML entities. Used for feed
// descriptions which usually carry escaped HTML.
std::string strip_html(std::string_view html);

// Lowercase + collapse whitespace runs + trim; the dedup key.
std::string normalize_for_dedup(std::string_view text);

}  // namespace newshub::ingest
