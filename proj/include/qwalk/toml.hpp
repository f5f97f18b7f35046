#pragma once

// A small TOML subset for run configs: [tables] and [dotted.tables], bare or
// quoted keys, strings, integers, floats, booleans, (nested, multi-line)
// arrays and inline tables, # comments. Parsed into an ordered JSON tree.

#include <json.hpp>

#include <string_view>

namespace qwalk {

/// Throws Error(config) with the line number on malformed input or duplicate keys.
nlohmann::ordered_json parse_toml(std::string_view text);

} // namespace qwalk
