#include "excur/toml_lite.hpp"

#include "excur/errors.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace excur {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// removes a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

nlohmann::json parse_scalar(const std::string& raw, int line_no) {
  const std::string v = strip(raw);
  if (v.empty())
    throw ConfigError("toml line " + std::to_string(line_no) + ": empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("toml line " + std::to_string(line_no) +
                        ": unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  // integer first, float fallback
  std::int64_t iv = 0;
  auto ir = std::from_chars(v.data(), v.data() + v.size(), iv);
  if (ir.ec == std::errc() && ir.ptr == v.data() + v.size()) return iv;
  double dv = 0.0;
  auto dr = std::from_chars(v.data(), v.data() + v.size(), dv);
  if (dr.ec == std::errc() && dr.ptr == v.data() + v.size()) return dv;
  throw ConfigError("toml line " + std::to_string(line_no) +
                    ": cannot parse value '" + v + "'");
}

nlohmann::json parse_value(const std::string& raw, int line_no) {
  const std::string v = strip(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']')
      throw ConfigError("toml line " + std::to_string(line_no) +
                        ": arrays must close on the same line");
    nlohmann::json arr = nlohmann::json::array();
    std::string inner = v.substr(1, v.size() - 2);
    std::string item;
    bool in_str = false;
    for (char ch : inner) {
      if (ch == '"') in_str = !in_str;
      if (ch == ',' && !in_str) {
        if (!strip(item).empty()) arr.push_back(parse_scalar(item, line_no));
        item.clear();
      } else {
        item += ch;
      }
    }
    if (!strip(item).empty()) arr.push_back(parse_scalar(item, line_no));
    return arr;
  }
  return parse_scalar(v, line_no);
}

std::string parse_key(const std::string& raw, int line_no) {
  std::string k = strip(raw);
  if (k.size() >= 2 && k.front() == '"' && k.back() == '"')
    k = k.substr(1, k.size() - 2);
  if (k.empty())
    throw ConfigError("toml line " + std::to_string(line_no) + ": empty key");
  return k;
}

}  // namespace

nlohmann::json parse_toml_lite(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("toml line " + std::to_string(line_no) +
                          ": malformed table header");
      const std::string path = strip(line.substr(1, line.size() - 2));
      if (path.empty() || path.front() == '[')
        throw ConfigError("toml line " + std::to_string(line_no) +
                          ": unsupported table header '" + line + "'");
      table = &root;
      std::size_t start = 0;
      while (start <= path.size()) {
        const std::size_t dot = path.find('.', start);
        const std::string part = parse_key(
            path.substr(start, dot == std::string::npos ? std::string::npos
                                                        : dot - start),
            line_no);
        table = &(*table)[part];
        if (!table->is_object() && !table->is_null())
          throw ConfigError("toml line " + std::to_string(line_no) +
                            ": table path collides with a value");
        if (table->is_null()) *table = nlohmann::json::object();
        if (dot == std::string::npos) break;
        start = dot + 1;
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("toml line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = parse_key(line.substr(0, eq), line_no);
    (*table)[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return root;
}

}  // namespace excur
