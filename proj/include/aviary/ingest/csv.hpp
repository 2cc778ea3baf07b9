#pragma once

// Minimal RFC 4180 reader plus the date/time and number conversions shared by
// every tabular format in the project. Dialect: comma separator, '.' decimal
// point, optional double quotes, LF or CRLF line endings, mandatory header.

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aviary::ingest {

struct CsvRow {
    std::size_t line = 0;  // 1-based physical line; the header is line 1
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
};

// Throws ParseError on an unterminated quote or an empty document.
CsvTable parse_csv(std::string_view text);

// Quotes a field only when it contains a separator, quote, or newline.
std::string csv_escape(std::string_view field);

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_seconds;

std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);

// Accepts "YYYY-MM-DDTHH:MM:SS" (also with a space separator or trailing 'Z').
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

// Shortest representation that round-trips to the same double.
std::string format_double(double value);

std::string read_text_file(const std::string& path);
std::vector<unsigned char> read_binary_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);
void write_binary_file(const std::string& path, const std::vector<unsigned char>& bytes);

}  // namespace aviary::ingest
