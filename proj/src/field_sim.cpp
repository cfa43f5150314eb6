#include "excur/field_sim.hpp"

#include "excur/errors.hpp"
#include "excur/limit_law.hpp"

#include <fftw3.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>

namespace excur {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  fftw_complex* data = nullptr;
  explicit FftwBuffer(std::size_t n) {
    data = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

// spectrum of the torus-wrapped covariance; returns the clipped fraction
double torus_spectrum(const CovarianceModel& model, const GridSpec& grid,
                      std::int64_t mx, std::int64_t my,
                      std::vector<double>& weights) {
  const std::size_t n = static_cast<std::size_t>(mx) * static_cast<std::size_t>(my);
  FftwBuffer buf(n);
  for (std::int64_t jy = 0; jy < my; ++jy) {
    const double wy = static_cast<double>(jy <= my - jy ? jy : my - jy);
    for (std::int64_t jx = 0; jx < mx; ++jx) {
      const double wx = static_cast<double>(jx <= mx - jx ? jx : mx - jx);
      const double dist = grid.delta * std::sqrt(wx * wx + wy * wy);
      const std::size_t idx = static_cast<std::size_t>(jy * mx + jx);
      buf.data[idx][0] = model.r(dist);
      buf.data[idx][1] = 0.0;
    }
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(my), static_cast<int>(mx), buf.data,
                            buf.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }

  double clipped = 0.0;
  double total = 0.0;
  weights.assign(n, 0.0);
  const double norm = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = buf.data[i][0];
    total += std::abs(lam);
    if (lam < 0.0) {
      clipped += -lam;
    } else {
      weights[i] = std::sqrt(lam / norm);
    }
  }
  return total > 0.0 ? clipped / total : 0.0;
}

}  // namespace

EmbeddingPlan plan_embedding(const CovarianceModel& model, const GridSpec& grid,
                             double clip_tol) {
  model.validate();
  grid.validate();
  EmbeddingPlan plan;
  plan.model = model;
  plan.grid = grid;
  plan.mx = 2 * grid.nx - 2;
  plan.my = 2 * grid.ny - 2;
  plan.clipped_fraction = torus_spectrum(model, grid, plan.mx, plan.my, plan.weights);
  if (plan.clipped_fraction > clip_tol) {
    plan.mx *= 2;
    plan.my *= 2;
    plan.clipped_fraction = torus_spectrum(model, grid, plan.mx, plan.my, plan.weights);
    if (plan.clipped_fraction > clip_tol) {
      throw EmbeddingError(
          "circulant embedding failed after one doubling: clipped spectral "
          "mass fraction " +
          std::to_string(plan.clipped_fraction) + " exceeds tolerance " +
          std::to_string(clip_tol));
    }
  }
  return plan;
}

std::pair<FieldRealization, FieldRealization> simulate_gaussian_pair(
    const EmbeddingPlan& plan, std::uint64_t seed) {
  const std::size_t n =
      static_cast<std::size_t>(plan.mx) * static_cast<std::size_t>(plan.my);
  if (plan.weights.size() != n)
    throw std::invalid_argument("embedding plan has inconsistent weights");

  FftwBuffer buf(n);
  PhiloxStream rng(seed, kLaneField);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = plan.weights[i];
    buf.data[i][0] = w * rng.next_normal();
    buf.data[i][1] = w * rng.next_normal();
  }

  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    p = fftw_plan_dft_2d(static_cast<int>(plan.my), static_cast<int>(plan.mx),
                         buf.data, buf.data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(p);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(p);
  }

  FieldRealization re, im;
  re.grid = plan.grid;
  im.grid = plan.grid;
  const std::size_t pixels =
      static_cast<std::size_t>(plan.grid.nx) * static_cast<std::size_t>(plan.grid.ny);
  re.values.resize(pixels);
  im.values.resize(pixels);
  for (std::int64_t iy = 0; iy < plan.grid.ny; ++iy) {
    for (std::int64_t ix = 0; ix < plan.grid.nx; ++ix) {
      const std::size_t src = static_cast<std::size_t>(iy * plan.mx + ix);
      const std::size_t dst = static_cast<std::size_t>(iy * plan.grid.nx + ix);
      re.values[dst] = buf.data[src][0];
      im.values[dst] = buf.data[src][1];
    }
  }
  return {std::move(re), std::move(im)};
}

FieldRealization simulate_gaussian(const EmbeddingPlan& plan, std::uint64_t seed) {
  return simulate_gaussian_pair(plan, seed).first;
}

FieldRealization perturb(const FieldRealization& field,
                         const PerturbationSpec& pspec, double x) {
  pspec.validate();
  if (field.shift != 0.0)
    throw std::logic_error("perturb: field already carries a shift");
  FieldRealization out = field;
  const double shift = pspec.epsilon * x;
  for (double& v : out.values) v += shift;
  out.shift = shift;
  return out;
}

void dump_field(const FieldRealization& field, const CovarianceModel& model,
                std::uint64_t seed, const std::string& path) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + path + " for writing");
  static_assert(sizeof(double) == 8);
  bin.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  bin.close();

  nlohmann::json meta;
  meta["nx"] = field.grid.nx;
  meta["ny"] = field.grid.ny;
  meta["delta"] = field.grid.delta;
  meta["sigma_g2"] = model.sigma_g2;
  meta["kappa"] = model.kappa;
  meta["seed"] = seed;
  meta["shift"] = field.shift;
  meta["layout"] = "row-major float64 little-endian, x fastest";
  std::ofstream side(path + ".json");
  if (!side) throw std::runtime_error("cannot open " + path + ".json for writing");
  side << meta.dump(2) << "\n";
}

}  // namespace excur
