#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace wbcde {

/// key=value pairs in file order; keys may repeat. Blank lines and text
/// after '#' are ignored, keys and values are trimmed. Throws FormatError
/// on a line without '='.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);

double parse_double(const std::string& key, const std::string& value);
long long parse_int(const std::string& key, const std::string& value);
unsigned long long parse_u64(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);

}  // namespace wbcde
