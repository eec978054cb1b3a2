#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oncoprompt::text {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Parses the whole string as a finite double; nullopt otherwise.
std::optional<double> parse_double(std::string_view s);

/// RFC 4180 style reader: quoted fields may hold commas, doubled quotes and
/// newlines. Returns false at end of input.
bool read_csv_row(std::istream& in, std::vector<std::string>& row);
std::string csv_escape(std::string_view field);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace oncoprompt::text
