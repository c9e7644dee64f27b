#include "factorlab/dates.h"

#include <array>
#include <cctype>
#include <cstdio>

#include "factorlab/common.h"

namespace factorlab {

namespace {

bool IsLeap(int year) {
  return year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
}

int DaysInMonth(int year, int month) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  if (month == 2 && IsLeap(year)) {
    return 29;
  }
  return kDays[month - 1];
}

// Howard Hinnant's days-from-civil.
std::int64_t DaysFromCivil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool ParseFields(const std::string& text, char sep, int* a, int* b, int* c) {
  std::size_t p1 = text.find(sep);
  if (p1 == std::string::npos) {
    return false;
  }
  std::size_t p2 = text.find(sep, p1 + 1);
  if (p2 == std::string::npos || text.find(sep, p2 + 1) != std::string::npos) {
    return false;
  }
  const std::string fa = text.substr(0, p1);
  const std::string fb = text.substr(p1 + 1, p2 - p1 - 1);
  const std::string fc = text.substr(p2 + 1);
  for (const std::string* f : {&fa, &fb, &fc}) {
    if (f->empty()) {
      return false;
    }
    for (char ch : *f) {
      if (std::isdigit(static_cast<unsigned char>(ch)) == 0) {
        return false;
      }
    }
  }
  *a = std::stoi(fa);
  *b = std::stoi(fb);
  *c = std::stoi(fc);
  return true;
}

}  // namespace

Date MakeDate(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1 || day > DaysInMonth(year, month)) {
    throw FormatError("invalid calendar date");
  }
  return static_cast<Date>(DaysFromCivil(year, month, day));
}

void CivilFromDate(Date date, int* year, int* month, int* day) {
  std::int64_t z = date + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  *day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  *month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  *year = static_cast<int>(y + (*month <= 2));
}

Date ParseDate(const std::string& text) {
  // Strip a trailing time component, if any.
  std::string date_part = text;
  std::size_t cut = date_part.find_first_of(" T");
  if (cut != std::string::npos) {
    date_part = date_part.substr(0, cut);
  }
  int a = 0;
  int b = 0;
  int c = 0;
  if (ParseFields(date_part, '-', &a, &b, &c)) {
    // ISO-8601 requires the four-digit year first.
    if (date_part.find('-') != 4) {
      throw FormatError("ambiguous dashed date (expected YYYY-MM-DD): " +
                        text);
    }
    return MakeDate(a, b, c);
  }
  if (ParseFields(date_part, '/', &a, &b, &c)) {
    // Slashed dates are day-first D/M/YYYY; a four-digit leading field or a
    // day that only fits the month slot is rejected instead of guessed.
    if (date_part.find('/') == 4) {
      throw FormatError("ambiguous slashed date (expected D/M/YYYY): " + text);
    }
    if (c < 1000) {
      throw FormatError("ambiguous slashed date (two-digit year): " + text);
    }
    return MakeDate(c, b, a);
  }
  throw FormatError("unparseable date: " + text);
}

std::string FormatDate(Date date) {
  int y = 0;
  int m = 0;
  int d = 0;
  CivilFromDate(date, &y, &m, &d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

}  // namespace factorlab
