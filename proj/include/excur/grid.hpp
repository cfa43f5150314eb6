#pragma once

#include <cstdint>
#include <stdexcept>

namespace excur {

// Rectangular pixel grid: nx columns, ny rows, spacing delta.
// Pixel (ix, iy) sits at physical location (ix * delta, iy * delta).
struct GridSpec {
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  double delta = 1.0;

  double area() const { return static_cast<double>(nx) * static_cast<double>(ny) * delta * delta; }
  double boundary_length() const { return 2.0 * static_cast<double>(nx + ny) * delta; }

  void validate() const {
    if (nx < 2 || ny < 2) throw std::invalid_argument("grid needs nx, ny >= 2");
    if (!(delta > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  }
};

}  // namespace excur
