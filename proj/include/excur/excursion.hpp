#pragma once

#include "excur/field_sim.hpp"
#include "excur/gkf.hpp"
#include "excur/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace excur {

// Binary excursion mask: bit set exactly where the field is >= level.
struct ExcursionMask {
  std::vector<std::uint8_t> bits;  // row-major, iy * nx + ix
  GridSpec grid;
  double level = 0.0;

  bool at(std::int64_t ix, std::int64_t iy) const {
    if (ix < 0 || iy < 0 || ix >= grid.nx || iy >= grid.ny) return false;
    return bits[static_cast<std::size_t>(iy * grid.nx + ix)] != 0;
  }
};

// Raw and derived Lipschitz-Killing curvatures of one mask. chi4 and chi8
// are the two digital Euler numbers; l0 is their average. l1 is the
// half-perimeter from the boundary-pixel count (set pixel with an unset
// 4-neighbor; the lattice edge counts as unset).
struct LKEstimate {
  double l0 = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double chi4 = 0.0;
  double chi8 = 0.0;
  CurvatureDensities c_over_t;  // filled by normalize
  CurvatureDensities c_hat;     // filled by bias_correct
};

ExcursionMask excursion_mask(const FieldRealization& field, double u);

ExcursionMask mask_complement(const ExcursionMask& mask);

// raw triple (l0, l1, l2) plus both connectivity Euler numbers
LKEstimate lk_curvatures(const ExcursionMask& mask);

// directional-intercept (Crofton) half-perimeter, lower pixelisation bias;
// opt-in alternative to the boundary-pixel count in lk_curvatures
double crofton_half_perimeter(const ExcursionMask& mask);

LKEstimate normalize(LKEstimate est, const GridSpec& grid);

LKEstimate bias_correct(LKEstimate est, const GridSpec& grid);

// convenience: raw + normalized + bias-corrected in one pass
LKEstimate lk_full(const ExcursionMask& mask);

// binary PBM (P4) export/import for visual inspection and mask ingestion
void write_pbm(const ExcursionMask& mask, const std::string& path);
ExcursionMask read_pbm(const std::string& path, double delta = 1.0);

}  // namespace excur
