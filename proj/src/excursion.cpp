#include "excur/excursion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace excur {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ExcursionMask excursion_mask(const FieldRealization& field, double u) {
  ExcursionMask mask;
  mask.grid = field.grid;
  mask.level = u;
  mask.bits.resize(field.values.size());
  for (std::size_t i = 0; i < field.values.size(); ++i)
    mask.bits[i] = field.values[i] >= u ? 1 : 0;
  return mask;
}

ExcursionMask mask_complement(const ExcursionMask& mask) {
  ExcursionMask out = mask;
  for (auto& b : out.bits) b = b ? 0 : 1;
  return out;
}

LKEstimate lk_curvatures(const ExcursionMask& mask) {
  const std::int64_t nx = mask.grid.nx;
  const std::int64_t ny = mask.grid.ny;
  const double delta = mask.grid.delta;

  std::int64_t set_count = 0;
  std::int64_t boundary_count = 0;
  for (std::int64_t iy = 0; iy < ny; ++iy) {
    for (std::int64_t ix = 0; ix < nx; ++ix) {
      if (!mask.at(ix, iy)) continue;
      ++set_count;
      if (!mask.at(ix - 1, iy) || !mask.at(ix + 1, iy) || !mask.at(ix, iy - 1) ||
          !mask.at(ix, iy + 1))
        ++boundary_count;
    }
  }

  // 2x2 quad patterns over the zero-padded lattice
  std::int64_t q1 = 0, q3 = 0, qd = 0;
  for (std::int64_t iy = -1; iy < ny; ++iy) {
    for (std::int64_t ix = -1; ix < nx; ++ix) {
      const int a = mask.at(ix, iy) ? 1 : 0;
      const int b = mask.at(ix + 1, iy) ? 1 : 0;
      const int c = mask.at(ix, iy + 1) ? 1 : 0;
      const int d = mask.at(ix + 1, iy + 1) ? 1 : 0;
      const int n = a + b + c + d;
      if (n == 1) ++q1;
      else if (n == 3) ++q3;
      else if (n == 2 && ((a && d) || (b && c))) ++qd;
    }
  }

  LKEstimate est;
  est.chi4 = 0.25 * static_cast<double>(q1 - q3 + 2 * qd);
  est.chi8 = 0.25 * static_cast<double>(q1 - q3 - 2 * qd);
  est.l0 = 0.5 * (est.chi4 + est.chi8);
  est.l1 = 0.5 * delta * static_cast<double>(boundary_count);
  est.l2 = delta * delta * static_cast<double>(set_count);
  return est;
}

double crofton_half_perimeter(const ExcursionMask& mask) {
  const std::int64_t nx = mask.grid.nx;
  const std::int64_t ny = mask.grid.ny;
  const double delta = mask.grid.delta;

  std::int64_t t_axis = 0;  // horizontal + vertical transitions
  std::int64_t t_diag = 0;  // both diagonal directions
  for (std::int64_t iy = -1; iy < ny; ++iy) {
    for (std::int64_t ix = -1; ix < nx; ++ix) {
      const bool p = mask.at(ix, iy);
      if (p != mask.at(ix + 1, iy)) ++t_axis;
      if (p != mask.at(ix, iy + 1)) ++t_axis;
      if (p != mask.at(ix + 1, iy + 1)) ++t_diag;
      if (mask.at(ix + 1, iy) != mask.at(ix, iy + 1)) ++t_diag;
    }
  }
  // four-direction Cauchy-Crofton estimate of the full perimeter, halved to
  // match the L1 convention
  return 0.5 * (kPi / 8.0) * delta *
         (static_cast<double>(t_axis) +
          static_cast<double>(t_diag) / std::sqrt(2.0));
}

LKEstimate normalize(LKEstimate est, const GridSpec& grid) {
  grid.validate();
  const double area = grid.area();
  est.c_over_t.c0 = est.l0 / area;
  est.c_over_t.c1 = est.l1 / area;
  est.c_over_t.c2 = est.l2 / area;
  return est;
}

LKEstimate bias_correct(LKEstimate est, const GridSpec& grid) {
  est.c_hat = bias_correct(est.c_over_t, grid);
  return est;
}

LKEstimate lk_full(const ExcursionMask& mask) {
  LKEstimate est = lk_curvatures(mask);
  est = normalize(est, mask.grid);
  est = bias_correct(est, mask.grid);
  return est;
}

void write_pbm(const ExcursionMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P4\n" << mask.grid.nx << " " << mask.grid.ny << "\n";
  const std::int64_t row_bytes = (mask.grid.nx + 7) / 8;
  std::vector<unsigned char> row(static_cast<std::size_t>(row_bytes));
  for (std::int64_t iy = 0; iy < mask.grid.ny; ++iy) {
    std::fill(row.begin(), row.end(), 0);
    for (std::int64_t ix = 0; ix < mask.grid.nx; ++ix) {
      if (mask.at(ix, iy))
        row[static_cast<std::size_t>(ix / 8)] |=
            static_cast<unsigned char>(0x80 >> (ix % 8));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row_bytes);
  }
}

namespace {

int next_pbm_token(std::istream& in) {
  // skips whitespace and '#' comments, returns the next integer
  for (;;) {
    int ch = in.get();
    if (ch == EOF) throw std::runtime_error("unexpected end of PBM header");
    if (std::isspace(ch)) continue;
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
      continue;
    }
    int value = 0;
    bool any = false;
    while (ch != EOF && std::isdigit(ch)) {
      value = value * 10 + (ch - '0');
      any = true;
      ch = in.get();
    }
    if (!any) throw std::runtime_error("malformed PBM header");
    return value;
  }
}

}  // namespace

ExcursionMask read_pbm(const std::string& path, double delta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[2];
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '4')
    throw std::runtime_error(path + " is not a binary PBM (P4) file");
  const int nx = next_pbm_token(in);
  const int ny = next_pbm_token(in);
  // exactly one whitespace byte separates the header from the raster; the
  // token scanner has already consumed it

  ExcursionMask mask;
  mask.grid = GridSpec{nx, ny, delta};
  mask.grid.validate();
  mask.bits.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
  const std::int64_t row_bytes = (nx + 7) / 8;
  std::vector<unsigned char> row(static_cast<std::size_t>(row_bytes));
  for (int iy = 0; iy < ny; ++iy) {
    in.read(reinterpret_cast<char*>(row.data()), row_bytes);
    if (in.gcount() != row_bytes)
      throw std::runtime_error(path + ": truncated PBM raster");
    for (int ix = 0; ix < nx; ++ix) {
      const bool bit =
          (row[static_cast<std::size_t>(ix / 8)] >> (7 - ix % 8)) & 1;
      mask.bits[static_cast<std::size_t>(iy) * nx + ix] = bit ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace excur
