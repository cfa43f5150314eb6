#pragma once

#include "excur/covariance.hpp"
#include "excur/grid.hpp"
#include "excur/perturbation.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace excur {

// One simulated lattice. values is row-major, index iy * nx + ix. shift
// records the constant eps * x added by perturb (0 for a pure Gaussian
// draw); experiments need the realized shift to center their statistics.
struct FieldRealization {
  std::vector<double> values;
  GridSpec grid;
  double shift = 0.0;

  double at(std::int64_t ix, std::int64_t iy) const {
    return values[static_cast<std::size_t>(iy * grid.nx + ix)];
  }
};

// Torus spectrum for circulant embedding. weights holds
// sqrt(max(lambda, 0) / (mx * my)) so simulation is one elementwise product
// and one backward transform. Immutable after planning; share freely.
struct EmbeddingPlan {
  CovarianceModel model;
  GridSpec grid;
  std::int64_t mx = 0;
  std::int64_t my = 0;
  std::vector<double> weights;
  double clipped_fraction = 0.0;
};

// Builds the minimal even embedding (2nx-2) x (2ny-2), doubling once if the
// clipped spectral mass exceeds clip_tol; throws EmbeddingError if the
// doubled torus still fails.
EmbeddingPlan plan_embedding(const CovarianceModel& model, const GridSpec& grid,
                             double clip_tol = 1e-6);

// Both independent realizations from one complex draw; deterministic in
// seed. Cost: one complex FFT on the torus.
std::pair<FieldRealization, FieldRealization> simulate_gaussian_pair(
    const EmbeddingPlan& plan, std::uint64_t seed);

FieldRealization simulate_gaussian(const EmbeddingPlan& plan, std::uint64_t seed);

// adds eps * x to every pixel and records the shift; rejects double
// perturbation
FieldRealization perturb(const FieldRealization& field,
                         const PerturbationSpec& pspec, double x);

// flat little-endian float64 dump (row-major, x fastest) plus a JSON sidecar
// with grid, model, seed, and shift metadata
void dump_field(const FieldRealization& field, const CovarianceModel& model,
                std::uint64_t seed, const std::string& path);

}  // namespace excur
