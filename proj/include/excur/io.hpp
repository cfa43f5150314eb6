#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace excur {

// locale-independent shortest-faithful float formatting (17 significant
// digits, general format); reruns must be byte-identical
std::string format_double(double value);

// In-memory CSV with a fixed column order and '\n' line endings. Rows are
// buffered so output is written in one deterministic pass.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(const std::vector<std::string>& cells);
  std::string to_string() const;
  void write(const std::string& path) const;

  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string sha256_hex(const std::string& bytes);

// hash of "blob <size>\0<content>", hex-encoded SHA-256
std::string content_hash(const std::string& content);

// experiment manifest: config echo, per-file content hashes, timing
void write_manifest(const std::string& path, const std::string& experiment,
                    const nlohmann::json& config_echo,
                    const std::vector<std::pair<std::string, std::string>>& file_hashes,
                    double wall_seconds, const nlohmann::json& extra);

}  // namespace excur
