#include "wbcde/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "wbcde/error.hpp"

namespace wbcde {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* begin = value.data();
    const char* end = begin + value.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("invalid value for '" + key + "': '" + value + "'");
    }
    return out;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
    KeyValues out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw FormatError("line " + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        if (key.empty()) throw FormatError("line " + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), trim(std::string_view(body).substr(eq + 1)));
    }
    return out;
}

KeyValues load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

double parse_double(const std::string& key, const std::string& value) {
    return parse_number<double>(key, value);
}

long long parse_int(const std::string& key, const std::string& value) {
    return parse_number<long long>(key, value);
}

unsigned long long parse_u64(const std::string& key, const std::string& value) {
    return parse_number<unsigned long long>(key, value);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    throw ConfigError("invalid boolean for '" + key + "': '" + value + "'");
}

}  // namespace wbcde
