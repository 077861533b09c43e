#pragma once

#include <map>
#include <string>
#include <vector>

namespace relaxdice {

/// Shortest decimal that round-trips to the same double; locale independent.
std::string format_double(double x);

/// Splits on `sep` without trimming.
std::vector<std::string> split(const std::string& text, char sep);

std::string trim(const std::string& text);

/// Parses "key = value" lines; '#' starts a comment. Throws InvalidArgument on
/// malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(const std::string& text);

double parse_double(const std::string& text);
long long parse_int(const std::string& text);

}  // namespace relaxdice
