#include "newshub/time.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace newshub {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant).
constexpr long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

struct Civil {
  long long y;
  unsigned m;
  unsigned d;
};

constexpr Civil civil_from_days(long long z) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long y = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

bool valid_date(long long y, unsigned m, unsigned d) {
  static constexpr std::array<unsigned, 12> kDays{31, 28, 31, 30, 31, 30,
                                                  31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12 || d < 1) return false;
  unsigned limit = kDays[m - 1];
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) limit = 29;
  return d <= limit;
}

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  void skip_spaces() {
    while (!done() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  // Reads between min_digits and max_digits decimal digits.
  bool number(int min_digits, int max_digits, int& out) {
    std::size_t start = pos_;
    while (!done() && std::isdigit(static_cast<unsigned char>(s_[pos_])) &&
           static_cast<int>(pos_ - start) < max_digits)
      ++pos_;
    int n = static_cast<int>(pos_ - start);
    if (n < min_digits) {
      pos_ = start;
      return false;
    }
    std::from_chars(s_.data() + start, s_.data() + pos_, out);
    return true;
  }
  std::string_view word() {
    std::size_t start = pos_;
    while (!done() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return s_.substr(start, pos_ - start);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::optional<Timestamp> assemble(int y, int mo, int d, int h, int mi, int s,
                                  int offset_seconds) {
  if (!valid_date(y, static_cast<unsigned>(mo), static_cast<unsigned>(d))) return std::nullopt;
  if (h > 23 || mi > 59 || s > 60) return std::nullopt;
  long long days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  long long secs = days * 86400 + h * 3600LL + mi * 60LL + s - offset_seconds;
  return Timestamp{std::chrono::seconds{secs}};
}

int month_from_name(std::string_view name) {
  static constexpr std::array<std::string_view, 12> kMonths{
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  if (name.size() < 3) return 0;
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < 3; ++k) {
      if (std::tolower(static_cast<unsigned char>(name[k])) != kMonths[i][k]) match = false;
    }
    if (match) return static_cast<int>(i) + 1;
  }
  return 0;
}

// Named zones from RFC-822 plus the military "Z".
std::optional<int> zone_offset(std::string_view zone) {
  std::string z;
  for (char c : zone) z.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (z == "GMT" || z == "UT" || z == "UTC" || z == "Z") return 0;
  if (z == "EST") return -5 * 3600;
  if (z == "EDT") return -4 * 3600;
  if (z == "CST") return -6 * 3600;
  if (z == "CDT") return -5 * 3600;
  if (z == "MST") return -7 * 3600;
  if (z == "MDT") return -6 * 3600;
  if (z == "PST") return -8 * 3600;
  if (z == "PDT") return -7 * 3600;
  return std::nullopt;
}

}  // namespace

std::optional<Timestamp> parse_rfc3339(std::string_view text) {
  Cursor c(text);
  c.skip_spaces();
  int y, mo, d, h, mi, s = 0;
  if (!c.number(4, 4, y) || !c.eat('-') || !c.number(2, 2, mo) || !c.eat('-') ||
      !c.number(2, 2, d))
    return std::nullopt;
  if (!c.eat('T') && !c.eat('t') && !c.eat(' ')) return std::nullopt;
  if (!c.number(2, 2, h) || !c.eat(':') || !c.number(2, 2, mi)) return std::nullopt;
  if (c.eat(':') && !c.number(2, 2, s)) return std::nullopt;
  if (c.eat('.')) {
    int frac;
    if (!c.number(1, 9, frac)) return std::nullopt;
  }
  int offset = 0;
  if (c.eat('Z') || c.eat('z')) {
    offset = 0;
  } else if (c.peek() == '+' || c.peek() == '-') {
    int sign = c.peek() == '-' ? -1 : 1;
    c.eat(c.peek());
    int oh, om;
    if (!c.number(2, 2, oh) || !c.eat(':') || !c.number(2, 2, om)) return std::nullopt;
    offset = sign * (oh * 3600 + om * 60);
  } else {
    return std::nullopt;
  }
  c.skip_spaces();
  if (!c.done()) return std::nullopt;
  return assemble(y, mo, d, h, mi, s, offset);
}

std::optional<Timestamp> parse_rfc822(std::string_view text) {
  Cursor c(text);
  c.skip_spaces();
  // Optional day-of-week.
  if (std::isalpha(static_cast<unsigned char>(c.peek()))) {
    c.word();
    c.eat(',');
    c.skip_spaces();
  }
  int d, y, h, mi, s = 0;
  if (!c.number(1, 2, d)) return std::nullopt;
  c.skip_spaces();
  int mo = month_from_name(c.word());
  if (mo == 0) return std::nullopt;
  c.skip_spaces();
  if (!c.number(2, 4, y)) return std::nullopt;
  if (y < 100) y += y < 50 ? 2000 : 1900;
  c.skip_spaces();
  if (!c.number(1, 2, h) || !c.eat(':') || !c.number(2, 2, mi)) return std::nullopt;
  if (c.eat(':') && !c.number(2, 2, s)) return std::nullopt;
  c.skip_spaces();
  int offset = 0;
  if (c.peek() == '+' || c.peek() == '-') {
    int sign = c.peek() == '-' ? -1 : 1;
    c.eat(c.peek());
    int hhmm;
    if (!c.number(4, 4, hhmm)) return std::nullopt;
    offset = sign * ((hhmm / 100) * 3600 + (hhmm % 100) * 60);
  } else if (!c.done()) {
    auto zone = zone_offset(c.word());
    if (!zone) return std::nullopt;
    offset = *zone;
  }
  c.skip_spaces();
  if (!c.done()) return std::nullopt;
  return assemble(y, mo, d, h, mi, s, offset);
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  if (auto t = parse_rfc3339(text)) return t;
  return parse_rfc822(text);
}

std::string format_rfc3339(Timestamp ts) {
  long long secs = ts.time_since_epoch().count();
  long long days = secs >= 0 ? secs / 86400 : (secs - 86399) / 86400;
  long long rem = secs - days * 86400;
  Civil c = civil_from_days(days);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", c.y, c.m, c.d,
                rem / 3600, (rem % 3600) / 60, rem % 60);
  return buf;
}

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour, int minute,
                         int second) {
  long long days = days_from_civil(year, month, day);
  return Timestamp{std::chrono::seconds{days * 86400 + hour * 3600LL + minute * 60LL + second}};
}

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

}  // namespace newshub
