#pragma once

#include <nlohmann/json.hpp>

#include <string>

namespace excur {

// Minimal TOML reader covering what experiment configs need: [table]
// headers with dotted paths, key = value lines, '#' comments, and values
// that are strings, integers, floats, booleans, or single-line arrays of
// those. Anything else is a ConfigError.
nlohmann::json parse_toml_lite(const std::string& text);

}  // namespace excur
