#pragma once

#include <stdexcept>
#include <string>

namespace excur {

// error categories aligned with CLI exit codes
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

struct EmbeddingError : std::runtime_error {
  explicit EmbeddingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace excur
