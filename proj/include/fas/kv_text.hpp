#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

// key=value line documents shared by the dataset header, the checkpoint
// header and run configs.
namespace fas::kv {

using Entries = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view key);
long long parse_int(std::string_view text, std::string_view key);
bool parse_bool(std::string_view text, std::string_view key);

std::string serialize(const Entries& entries);
/// Parses "key=value" lines; blank lines and '#' comments are skipped.
/// Throws ErrorKind::config on a malformed line or duplicate key.
Entries parse(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace fas::kv
