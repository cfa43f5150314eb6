#include "excur/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace excur {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline void mul_hilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                     std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::array<std::uint64_t, 4> Philox4x64::block(
    const std::array<std::uint64_t, 4>& counter) const {
  std::array<std::uint64_t, 4> c = counter;
  std::array<std::uint64_t, 2> k = key;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mul_hilo(kPhiloxM0, c[0], hi0, lo0);
    mul_hilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return c;
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint64_t lane)
    : seed_(seed), lane_(lane) {
  engine_.key = {seed, kGolden};
}

void PhiloxStream::refill() {
  buffer_ = engine_.block({block_index_, 0, lane_, 0});
  ++block_index_;
  buffer_pos_ = 0;
}

std::uint64_t PhiloxStream::next_u64() {
  if (buffer_pos_ >= 4) refill();
  return buffer_[buffer_pos_++];
}

double PhiloxStream::next_u01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double PhiloxStream::next_normal() {
  if (have_spare_normal_) {
    have_spare_normal_ = false;
    return spare_normal_;
  }
  const double u1 = next_u01();
  const double u2 = next_u01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_normal_ = r * std::sin(theta);
  have_spare_normal_ = true;
  return r * std::cos(theta);
}

std::int64_t PhiloxStream::next_poisson(double mu) {
  if (mu < 0.0) throw std::invalid_argument("poisson rate must be >= 0");
  std::int64_t total = 0;
  // Poisson(a+b) splits into independent Poisson(a) + Poisson(b); chunking
  // keeps the product method's exp(-mu) factor away from underflow.
  while (mu > 30.0) {
    double chunk = 30.0;
    const double l = std::exp(-chunk);
    double p = 1.0;
    std::int64_t k = -1;
    do {
      ++k;
      p *= next_u01();
    } while (p > l);
    total += k;
    mu -= chunk;
  }
  const double l = std::exp(-mu);
  double p = 1.0;
  std::int64_t k = -1;
  do {
    ++k;
    p *= next_u01();
  } while (p > l);
  return total + k;
}

double PhiloxStream::next_gamma(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
  if (alpha < 1.0) {
    const double u = next_u01();
    return next_gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
  }
  // Marsaglia-Tsang squeeze
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, vcube;
    do {
      x = next_normal();
      vcube = 1.0 + c * x;
    } while (vcube <= 0.0);
    vcube = vcube * vcube * vcube;
    const double u = next_u01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * vcube;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - vcube + std::log(vcube)))
      return d * vcube;
  }
}

double PhiloxStream::next_chi2(double nu) { return 2.0 * next_gamma(0.5 * nu); }

double PhiloxStream::next_student_t(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("student-t dof must be > 0");
  const double z = next_normal();
  const double v = next_chi2(nu);
  return z * std::sqrt(nu / v);
}

std::int64_t PhiloxStream::next_skellam(double mu1, double mu2) {
  return next_poisson(mu1) - next_poisson(mu2);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t splitmix64_mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replica,
                          std::string_view experiment_name) {
  std::uint64_t h = splitmix64_mix(master_seed ^ fnv1a64(experiment_name));
  return splitmix64_mix(h + 0x9E3779B97F4A7C15ULL * (replica + 1));
}

}  // namespace excur
