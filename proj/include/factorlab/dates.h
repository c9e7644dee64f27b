#ifndef FACTORLAB_DATES_H_
#define FACTORLAB_DATES_H_

#include <cstdint>
#include <string>

namespace factorlab {

// Calendar date as days since 1970-01-01. Integer arithmetic gives calendar
// windows directly (t - 6 is "six days earlier").
using Date = std::int32_t;

Date MakeDate(int year, int month, int day);
void CivilFromDate(Date date, int* year, int* month, int* day);

// Accepts ISO-8601 (YYYY-MM-DD) and day-first D/M/Y. A leading date part of
// a timestamp ("2021-03-04 17:20:00") is accepted; the time is discarded.
// Ambiguous or malformed text throws FormatError.
Date ParseDate(const std::string& text);

// ISO-8601 rendering, the canonical form for all outputs.
std::string FormatDate(Date date);

}  // namespace factorlab

#endif  // FACTORLAB_DATES_H_
