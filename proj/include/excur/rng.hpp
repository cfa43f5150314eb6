#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace excur {

// Philox4x64-10 counter-based generator. A (key, counter) pair maps to four
// 64-bit words; streams over disjoint counters are independent, which makes
// per-replica seeding order-independent.
struct Philox4x64 {
  std::array<std::uint64_t, 2> key{0, 0};

  std::array<std::uint64_t, 4> block(const std::array<std::uint64_t, 4>& counter) const;
};

// Buffered stream over Philox blocks. `lane` selects a substream (field
// noise, perturbation draws, ...) so one seed covers several independent
// uses; the block index occupies counter word 0, the lane word 2.
class PhiloxStream {
 public:
  explicit PhiloxStream(std::uint64_t seed, std::uint64_t lane = 0);

  std::uint64_t next_u64();
  double next_u01();       // uniform on (0,1), 53-bit resolution
  double next_normal();    // standard normal, Box-Muller
  std::int64_t next_poisson(double mu);
  double next_gamma(double alpha);     // shape alpha, unit scale
  double next_chi2(double nu);
  double next_student_t(double nu);
  std::int64_t next_skellam(double mu1, double mu2);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t lane() const { return lane_; }

 private:
  void refill();

  Philox4x64 engine_;
  std::uint64_t seed_ = 0;
  std::uint64_t lane_ = 0;
  std::uint64_t block_index_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  int buffer_pos_ = 4;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Stable replica seed: mixes the master seed, replica index, and experiment
// name so partial reruns and reordered execution reproduce the same draws.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replica,
                          std::string_view experiment_name);

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64_mix(std::uint64_t x);

}  // namespace excur
