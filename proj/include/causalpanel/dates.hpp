#pragma once

#include <string>
#include <vector>

namespace causalpanel::dates {

// Dates travel as ISO-8601 strings (YYYY-MM-DD) everywhere; lexicographic
// comparison then matches chronological order. These helpers do the civil
// calendar arithmetic behind gap detection and range construction.

bool is_valid_iso(const std::string& iso);

// Days since 1970-01-01 (negative before). Throws MalformedCsv on bad input.
long long to_epoch_days(const std::string& iso);
std::string from_epoch_days(long long days);

std::string next_day(const std::string& iso);

// Signed day count from `a` to `b`.
long long days_between(const std::string& a, const std::string& b);

// All days from `first` to `last` inclusive; throws if last < first.
std::vector<std::string> range_inclusive(const std::string& first, const std::string& last);

// Converts the M/D/YY header style of wide epidemic exports to ISO
// (two-digit years are 2000-based).
std::string from_mdy(const std::string& mdy);

} // namespace causalpanel::dates
