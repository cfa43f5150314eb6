#include "excur/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace excur {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> columns)
    : columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("CSV needs columns");
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("CSV row width mismatch");
  rows_.push_back(cells);
}

std::string CsvTable::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  const std::string body = to_string();
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string content_hash(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob += '\0';
  blob += content;
  return sha256_hex(blob);
}

void write_manifest(const std::string& path, const std::string& experiment,
                    const nlohmann::json& config_echo,
                    const std::vector<std::pair<std::string, std::string>>& file_hashes,
                    double wall_seconds, const nlohmann::json& extra) {
  nlohmann::json m;
  m["experiment"] = experiment;
  m["config"] = config_echo;
  nlohmann::json files = nlohmann::json::object();
  for (const auto& [name, hash] : file_hashes) files[name] = "sha256:" + hash;
  m["outputs"] = files;
  m["wall_time_seconds"] = wall_seconds;
  if (!extra.is_null()) m["results"] = extra;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << m.dump(2) << "\n";
}

}  // namespace excur
