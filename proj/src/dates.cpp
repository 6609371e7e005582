#include "causalpanel/dates.hpp"

#include "causalpanel/errors.hpp"

#include <charconv>

namespace causalpanel::dates {

namespace {

bool parse_int_field(const std::string& s, std::size_t begin, std::size_t end, int& out) {
    if (begin >= end || end > s.size()) return false;
    auto res = std::from_chars(s.data() + begin, s.data() + end, out);
    return res.ec == std::errc() && res.ptr == s.data() + end;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

// Howard Hinnant's days-from-civil algorithm.
long long civil_to_days(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097LL + static_cast<long long>(doe) - 719468LL;
}

void days_to_civil(long long z, int& y, int& m, int& d) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long yy = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2));
}

bool parse_iso(const std::string& iso, int& y, int& m, int& d) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return false;
    if (!parse_int_field(iso, 0, 4, y)) return false;
    if (!parse_int_field(iso, 5, 7, m)) return false;
    if (!parse_int_field(iso, 8, 10, d)) return false;
    if (m < 1 || m > 12) return false;
    if (d < 1 || d > days_in_month(y, m)) return false;
    return true;
}

} // namespace

bool is_valid_iso(const std::string& iso) {
    int y, m, d;
    return parse_iso(iso, y, m, d);
}

long long to_epoch_days(const std::string& iso) {
    int y, m, d;
    if (!parse_iso(iso, y, m, d)) throw MalformedCsv("bad ISO date '" + iso + "'");
    return civil_to_days(y, m, d);
}

std::string from_epoch_days(long long days) {
    int y, m, d;
    days_to_civil(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::string next_day(const std::string& iso) { return from_epoch_days(to_epoch_days(iso) + 1); }

long long days_between(const std::string& a, const std::string& b) {
    return to_epoch_days(b) - to_epoch_days(a);
}

std::vector<std::string> range_inclusive(const std::string& first, const std::string& last) {
    const long long a = to_epoch_days(first);
    const long long b = to_epoch_days(last);
    if (b < a) throw MalformedCsv("date range end '" + last + "' precedes start '" + first + "'");
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(b - a + 1));
    for (long long t = a; t <= b; ++t) out.push_back(from_epoch_days(t));
    return out;
}

std::string from_mdy(const std::string& mdy) {
    const auto s1 = mdy.find('/');
    const auto s2 = mdy.find('/', s1 == std::string::npos ? s1 : s1 + 1);
    if (s1 == std::string::npos || s2 == std::string::npos)
        throw MalformedCsv("bad M/D/YY date '" + mdy + "'");
    int m = 0, d = 0, y = 0;
    if (!parse_int_field(mdy, 0, s1, m) || !parse_int_field(mdy, s1 + 1, s2, d) ||
        !parse_int_field(mdy, s2 + 1, mdy.size(), y))
        throw MalformedCsv("bad M/D/YY date '" + mdy + "'");
    if (y < 100) y += 2000;
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
        throw MalformedCsv("bad M/D/YY date '" + mdy + "'");
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

} // namespace causalpanel::dates
