#include "ubf/timestamp.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "ubf/error.hpp"

namespace ubf {

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  int digits(std::size_t count) {
    if (pos_ + count > text_.size()) fail();
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const char c = text_[pos_ + i];
      if (!std::isdigit(static_cast<unsigned char>(c))) fail();
      value = value * 10 + (c - '0');
    }
    pos_ += count;
    return value;
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail();
    ++pos_;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool at_end() const { return pos_ == text_.size(); }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_fraction() {
    std::size_t n = 0;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
      ++n;
    }
    if (n == 0) fail();
  }

  [[noreturn]] void fail() const {
    throw ParseError("invalid ISO-8601 timestamp '" + std::string(text_) + "'");
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  Cursor cur(text);
  const int y = cur.digits(4);
  cur.expect('-');
  const int mo = cur.digits(2);
  cur.expect('-');
  const int d = cur.digits(2);
  if (!cur.accept('T') && !cur.accept('t') && !cur.accept(' ')) cur.fail();
  const int h = cur.digits(2);
  cur.expect(':');
  const int mi = cur.digits(2);
  int s = 0;
  if (cur.accept(':')) {
    s = cur.digits(2);
    if (cur.accept('.') || cur.accept(',')) cur.skip_fraction();
  }

  int offset_minutes = 0;
  if (cur.accept('Z') || cur.accept('z')) {
  } else if (cur.peek() == '+' || cur.peek() == '-') {
    const int sign = cur.peek() == '-' ? -1 : 1;
    cur.accept(cur.peek());
    const int oh = cur.digits(2);
    cur.accept(':');
    const int om = cur.digits(2);
    if (oh > 23 || om > 59) cur.fail();
    offset_minutes = sign * (oh * 60 + om);
  }
  if (!cur.at_end()) cur.fail();

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) cur.fail();

  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} -
         minutes{offset_minutes};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const sys_days day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> tod{t - day_point};
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02ldZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(tod.hours().count()),
                static_cast<long>(tod.minutes().count()),
                static_cast<long>(tod.seconds().count()));
  return buf;
}

double hours_between(Timestamp from, Timestamp to) {
  return static_cast<double>((to - from).count()) / 3600.0;
}

std::chrono::sys_days utc_date(Timestamp t) {
  return std::chrono::floor<std::chrono::days>(t);
}

}  // namespace ubf
