#pragma once

#include <cctype>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "ragnar/errors.hpp"

namespace ragnar {

/// Calendar month. Stored as a month count since year 0 so arithmetic is
/// plain integer arithmetic.
class YearMonth {
 public:
  constexpr YearMonth() = default;
  constexpr YearMonth(int year, int month) : index_(year * 12 + (month - 1)) {}

  static constexpr YearMonth from_index(int index) {
    YearMonth ym;
    ym.index_ = index;
    return ym;
  }

  constexpr int year() const { return floor_div(index_, 12); }
  constexpr int month() const { return index_ - year() * 12 + 1; }
  constexpr int index() const { return index_; }

  constexpr YearMonth operator+(int months) const { return from_index(index_ + months); }
  constexpr YearMonth operator-(int months) const { return from_index(index_ - months); }
  constexpr int operator-(YearMonth other) const { return index_ - other.index_; }
  constexpr YearMonth& operator+=(int months) {
    index_ += months;
    return *this;
  }

  constexpr auto operator<=>(const YearMonth&) const = default;

  /// "YYYY-MM".
  std::string str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
    return buf;
  }

  /// Parses `text` against a strftime-like format. Supported tokens: %Y, %m,
  /// %d (day is read and ignored), %b (English month abbreviation), and
  /// literal characters. Default accepts both "YYYY-MM" and "YYYY-MM-DD".
  static YearMonth parse(std::string_view text, std::string_view format = "%Y-%m") {
    int year = -1, month = -1;
    std::size_t pos = 0;
    auto read_int = [&](int max_digits) {
      int v = 0, n = 0;
      while (pos < text.size() && n < max_digits && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        v = v * 10 + (text[pos] - '0');
        ++pos;
        ++n;
      }
      if (n == 0) throw DataError("bad date '" + std::string(text) + "' for format '" + std::string(format) + "'");
      return v;
    };
    for (std::size_t f = 0; f < format.size(); ++f) {
      if (format[f] == '%' && f + 1 < format.size()) {
        const char tok = format[++f];
        if (tok == 'Y') {
          year = read_int(4);
        } else if (tok == 'm') {
          month = read_int(2);
        } else if (tok == 'd') {
          read_int(2);
        } else if (tok == 'b') {
          static constexpr std::string_view names[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                                       "jul", "aug", "sep", "oct", "nov", "dec"};
          if (pos + 3 > text.size()) throw DataError("bad month name in '" + std::string(text) + "'");
          std::string abbr;
          for (int k = 0; k < 3; ++k) abbr += static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos + k])));
          pos += 3;
          for (int k = 0; k < 12; ++k)
            if (names[k] == abbr) month = k + 1;
        } else {
          throw DataError("unsupported date token %" + std::string(1, tok));
        }
      } else {
        if (pos >= text.size() || text[pos] != format[f])
          throw DataError("bad date '" + std::string(text) + "' for format '" + std::string(format) + "'");
        ++pos;
      }
    }
    // Trailing "-DD" after a "%Y-%m" format is tolerated.
    if (pos < text.size() && format == "%Y-%m" && text[pos] == '-') {
      ++pos;
      read_int(2);
    }
    if (pos != text.size() || year < 0 || month < 1 || month > 12)
      throw DataError("bad date '" + std::string(text) + "' for format '" + std::string(format) + "'");
    return YearMonth(year, month);
  }

 private:
  static constexpr int floor_div(int a, int b) { return (a >= 0) ? a / b : -((-a + b - 1) / b); }
  int index_ = 0;
};

}  // namespace ragnar
