#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace causalpanel::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Minimal RFC-4180-ish reader: fields may be double-quoted (commas and ""
// escapes inside); no embedded newlines. Throws MalformedCsv on I/O or quote
// errors and on ragged rows.
Table read_file(const std::string& path);
std::vector<std::string> split_line(const std::string& line);

// Quotes only when the field needs it, so round-trips of our own output are
// byte-stable.
std::string join_fields(const std::vector<std::string>& fields);

// Exact-parse helpers: the full field must consume, otherwise MalformedCsv.
double parse_double(const std::string& field, const std::string& context);
std::int64_t parse_int(const std::string& field, const std::string& context);

// Canonical float formatting: shortest decimal string that parses back to the
// same double. Integers render without an exponent or trailing ".0".
std::string format_double(double v);

} // namespace causalpanel::csv
