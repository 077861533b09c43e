#include "relaxdice/text.hpp"

#include <charconv>
#include <sstream>

#include "relaxdice/errors.hpp"

namespace relaxdice {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    if (res.ec != std::errc{}) throw InternalError("cannot format number");
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(current);
    return parts;
}

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("line " + std::to_string(number) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw InvalidArgument("line " + std::to_string(number) + ": empty key");
        if (!out.emplace(key, trim(line.substr(eq + 1))).second)
            throw InvalidArgument("duplicate key '" + key + "'");
    }
    return out;
}

double parse_double(const std::string& text) {
    const auto t = trim(text);
    double value = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw InvalidArgument("not a number: '" + text + "'");
    return value;
}

long long parse_int(const std::string& text) {
    const auto t = trim(text);
    long long value = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw InvalidArgument("not an integer: '" + text + "'");
    return value;
}

}  // namespace relaxdice
