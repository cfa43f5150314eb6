#include "excur/limit_law.hpp"

#include "excur/errors.hpp"
#include "excur/gkf.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace excur {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

// shared kernel: deriv = 0 gives v, 1 gives dv/du, 2 gives d2v/du2
double variance_kernel(const CovarianceModel& m, double u, int deriv,
                       double tol) {
  m.validate();
  const double sg2 = m.sigma_g2;
  const double smax = m.rho_support_radius(1e-14);
  const double inner_tol = tol / 10.0;

  auto outer = [&](double s) {
    const double rho = m.rho(s);
    const double theta_max = std::asin(rho);
    auto inner = [&](double theta) {
      const double a = 1.0 / (sg2 * (1.0 + std::sin(theta)));
      const double e = std::exp(-u * u * a);
      switch (deriv) {
        case 0: return e;
        case 1: return -2.0 * u * a * e;
        default: return (-2.0 * a + 4.0 * u * u * a * a) * e;
      }
    };
    return s * GK::integrate(inner, 0.0, theta_max, 10, inner_tol);
  };

  double err = 0.0;
  const double result = GK::integrate(outer, 0.0, smax, 10, tol, &err);
  const double scale = std::max(std::abs(result), 1e-30);
  if (err > 1e3 * tol * scale) {
    throw NumericalError("variance quadrature did not converge: estimate " +
                         std::to_string(result) + ", error " +
                         std::to_string(err));
  }
  return result;
}

double normal_cdf(double x) { return gaussian_tail(-x); }

double student_t_pdf(double nu, double x) {
  const double c = std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
                   std::sqrt(nu * kPi);
  return c * std::pow(1.0 + x * x / nu, -0.5 * (nu + 1.0));
}

double gaussian_density(double v, double y) {
  if (v <= 0.0) return y == 0.0 ? kInf : 0.0;
  return std::exp(-0.5 * y * y / v) / std::sqrt(2.0 * kPi * v);
}

double gaussian_cdf_scaled(double v, double y) {
  if (v <= 0.0) return y < 0.0 ? 0.0 : (y > 0.0 ? 1.0 : 0.5);
  return normal_cdf(y / std::sqrt(v));
}

}  // namespace

double variance_v(const CovarianceModel& m, double u, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("variance_v: tol must be > 0");
  return variance_kernel(m, u, 0, tol);
}

double nodal_variance_arcsine(const CovarianceModel& m, double tol) {
  m.validate();
  const double smax = m.rho_support_radius(1e-14);
  auto f = [&](double s) { return std::asin(m.rho(s)) * s; };
  return GK::integrate(f, 0.0, smax, 10, tol);
}

double variance_v_series(const CovarianceModel& m, double u, int n_terms) {
  m.validate();
  if (n_terms < 1)
    throw std::invalid_argument("variance_v_series: need n_terms >= 1");
  const double ub = u / m.sigma_g();
  const double phi2 = normal_pdf(ub) * normal_pdf(ub);
  const double pref = kPi / (m.kappa * m.kappa);

  double total = 0.0;
  double h_prev = 0.0;  // normalized Hermite \hat h_{m-1}
  double h_cur = 1.0;   // \hat h_0
  int tiny_run = 0;
  for (int n = 1; n <= n_terms; ++n) {
    // term n uses \hat h_{n-1}: phi^2 H_{n-1}^2 / n! * pref / n
    const double term =
        phi2 * h_cur * h_cur * pref / (static_cast<double>(n) * n);
    total += term;
    if (n >= 200) {
      tiny_run = (term < 1e-14 * total) ? tiny_run + 1 : 0;
      if (tiny_run >= 8) break;
    }
    // advance \hat h_m -> \hat h_{m+1} with m = n - 1
    const double mm = static_cast<double>(n - 1);
    const double h_next =
        (ub * h_cur - std::sqrt(mm) * h_prev) / std::sqrt(mm + 1.0);
    h_prev = h_cur;
    h_cur = h_next;
  }
  return total;
}

std::pair<double, double> variance_derivatives(const CovarianceModel& m,
                                               double u, double tol) {
  if (!(tol > 0.0))
    throw std::invalid_argument("variance_derivatives: tol must be > 0");
  return {variance_kernel(m, u, 1, tol), variance_kernel(m, u, 2, tol)};
}

std::pair<double, double> gamma_coefficients(const CovarianceModel& m, double u,
                                             const PerturbationSpec& pspec) {
  pspec.validate();
  const double e2m2 = pspec.epsilon * pspec.epsilon * pspec.m2();
  if (e2m2 == 0.0) return {0.0, 0.0};
  const double v = variance_v(m, u);
  const auto [vp, vpp] = variance_derivatives(m, u);
  const double g1 = (3.0 / 8.0) * e2m2 * (vp / v) * (vp / v);
  const double g2 = e2m2 * vpp / (2.0 * std::sqrt(2.0) * v);
  return {g1, g2};
}

LimitLawParams limit_law_params(const CovarianceModel& m, double u,
                                const PerturbationSpec& pspec) {
  pspec.validate();
  LimitLawParams p;
  p.v = variance_v(m, u);
  std::tie(p.vp, p.vpp) = variance_derivatives(m, u);
  const double e2m2 = pspec.epsilon * pspec.epsilon * pspec.m2();
  p.gamma1 = (3.0 / 8.0) * e2m2 * (p.vp / p.v) * (p.vp / p.v);
  p.gamma2 = e2m2 * p.vpp / (2.0 * std::sqrt(2.0) * p.v);
  return p;
}

double bep_density(double v, int delta, double y) {
  if (!(v > 0.0)) throw std::domain_error("bep_density: variance must be > 0");
  if (delta != 0 && delta != 2 && delta != 4)
    throw std::domain_error("bep_density: delta must be 0, 2, or 4");
  const double root2v = std::sqrt(2.0 * v);
  const double z = std::abs(y) / root2v;
  const double gamma_half = delta == 0   ? std::sqrt(kPi)
                            : delta == 2 ? 0.5 * std::sqrt(kPi)
                                         : 0.75 * std::sqrt(kPi);
  const double zp = delta == 0 ? 1.0 : (delta == 2 ? z * z : z * z * z * z);
  return zp * std::exp(-z * z) / (root2v * gamma_half);
}

double truncated_limit_density(const LimitLawParams& p, double y) {
  const double c0 = 1.0 + p.gamma1 - p.gamma2;
  const double c2 = p.gamma2 - 2.0 * p.gamma1;
  const double c4 = p.gamma1;
  return c0 * bep_density(p.v, 0, y) + c2 * bep_density(p.v, 2, y) +
         c4 * bep_density(p.v, 4, y);
}

double truncated_limit_density(const CovarianceModel& m, double u,
                               const PerturbationSpec& pspec, double y) {
  return truncated_limit_density(limit_law_params(m, u, pspec), y);
}

DensityDiagnostics truncated_density_diagnostics(const LimitLawParams& p,
                                                 double half_range,
                                                 int n_points) {
  if (n_points < 3)
    throw std::invalid_argument("diagnostics need at least 3 points");
  DensityDiagnostics d;
  d.min_value = kInf;
  const double step = 2.0 * half_range / (n_points - 1);
  double prev = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double y = -half_range + i * step;
    const double h = truncated_limit_density(p, y);
    if (h < d.min_value) {
      d.min_value = h;
      d.min_location = y;
    }
    if (i > 0) d.integral += 0.5 * (prev + h) * step;
    prev = h;
  }
  return d;
}

double exact_mixture_density(const CovarianceModel& m, double u,
                             const PerturbationSpec& pspec, double y,
                             const MixtureEval& eval) {
  pspec.validate();
  const double eps = pspec.epsilon;
  if (pspec.law == PerturbLaw::Degenerate || eps == 0.0)
    return gaussian_density(variance_v_series(m, u, eval.series_terms), y);
  if (pspec.law == PerturbLaw::Skellam) {
    const long long kmax = skellam_support_bound(pspec.mu1, eval.tail_mass);
    double total = 0.0;
    for (long long k = -kmax; k <= kmax; ++k) {
      const double vk =
          variance_v_series(m, u - eps * static_cast<double>(k), eval.series_terms);
      const double phik = gaussian_density(vk, y);
      if (std::isinf(phik)) return kInf;
      total += skellam_pmf(pspec.mu1, k) * phik;
    }
    return total;
  }
  // Student-t mixture: the small-variance tail makes the density blow up at
  // the origin itself; quadrature is only meaningful for y != 0
  if (y == 0.0) return kInf;
  auto f = [&](double x) {
    const double vx = variance_v_series(m, u - eps * x, eval.series_terms);
    return student_t_pdf(pspec.nu, x) * gaussian_density(vx, y);
  };
  return GK::integrate(f, -kInf, kInf, 10, eval.quad_tol);
}

double exact_mixture_cdf(const CovarianceModel& m, double u,
                         const PerturbationSpec& pspec, double y,
                         const MixtureEval& eval) {
  pspec.validate();
  const double eps = pspec.epsilon;
  if (pspec.law == PerturbLaw::Degenerate || eps == 0.0)
    return gaussian_cdf_scaled(variance_v_series(m, u, eval.series_terms), y);
  if (pspec.law == PerturbLaw::Skellam) {
    const long long kmax = skellam_support_bound(pspec.mu1, eval.tail_mass);
    double total = 0.0;
    double mass = 0.0;
    for (long long k = -kmax; k <= kmax; ++k) {
      const double pk = skellam_pmf(pspec.mu1, k);
      const double vk =
          variance_v_series(m, u - eps * static_cast<double>(k), eval.series_terms);
      total += pk * gaussian_cdf_scaled(vk, y);
      mass += pk;
    }
    return total / mass;  // renormalize the truncated support
  }
  auto f = [&](double x) {
    const double vx = variance_v_series(m, u - eps * x, eval.series_terms);
    return student_t_pdf(pspec.nu, x) * gaussian_cdf_scaled(vx, y);
  };
  return GK::integrate(f, -kInf, kInf, 10, eval.quad_tol);
}

double expected_mixture_variance(const CovarianceModel& m, double u,
                                 const PerturbationSpec& pspec,
                                 const MixtureEval& eval) {
  pspec.validate();
  const double eps = pspec.epsilon;
  if (pspec.law == PerturbLaw::Degenerate || eps == 0.0)
    return variance_v_series(m, u, eval.series_terms);
  if (pspec.law == PerturbLaw::Skellam) {
    const long long kmax = skellam_support_bound(pspec.mu1, eval.tail_mass);
    double total = 0.0;
    double mass = 0.0;
    for (long long k = -kmax; k <= kmax; ++k) {
      const double pk = skellam_pmf(pspec.mu1, k);
      total += pk * variance_v_series(m, u - eps * static_cast<double>(k),
                                      eval.series_terms);
      mass += pk;
    }
    return total / mass;
  }
  auto f = [&](double x) {
    return student_t_pdf(pspec.nu, x) *
           variance_v_series(m, u - eps * x, eval.series_terms);
  };
  return GK::integrate(f, -kInf, kInf, 10, eval.quad_tol);
}

double exact_mean_area_fraction(const CovarianceModel& m, double u,
                                const PerturbationSpec& pspec,
                                const MixtureEval& eval) {
  m.validate();
  pspec.validate();
  const double sg = m.sigma_g();
  const double eps = pspec.epsilon;
  if (pspec.law == PerturbLaw::Degenerate || eps == 0.0)
    return gaussian_tail(u / sg);
  if (pspec.law == PerturbLaw::Skellam) {
    const long long kmax = skellam_support_bound(pspec.mu1, eval.tail_mass);
    double total = 0.0;
    double mass = 0.0;
    for (long long k = -kmax; k <= kmax; ++k) {
      const double pk = skellam_pmf(pspec.mu1, k);
      total += pk * gaussian_tail((u - eps * static_cast<double>(k)) / sg);
      mass += pk;
    }
    return total / mass;
  }
  auto f = [&](double x) {
    return student_t_pdf(pspec.nu, x) * gaussian_tail((u - eps * x) / sg);
  };
  return GK::integrate(f, -kInf, kInf, 10, eval.quad_tol);
}

ThetaSampler::ThetaSampler(const CovarianceModel& m, double u,
                           const PerturbationSpec& pspec, int series_terms)
    : model_(m), u_(u), pspec_(pspec), series_terms_(series_terms) {
  model_.validate();
  pspec_.validate();
  v_center_ = variance_v_series(model_, u_, series_terms_);
}

double ThetaSampler::variance_at_shift(double x) {
  if (x == 0.0 || pspec_.epsilon == 0.0) return v_center_;
  if (pspec_.law == PerturbLaw::Skellam) {
    const long long k = static_cast<long long>(std::llround(x));
    auto it = atom_cache_.find(k);
    if (it != atom_cache_.end()) return it->second;
    const double v = variance_v_series(
        model_, u_ - pspec_.epsilon * static_cast<double>(k), series_terms_);
    atom_cache_.emplace(k, v);
    return v;
  }
  return variance_v_series(model_, u_ - pspec_.epsilon * x, series_terms_);
}

double ThetaSampler::sample(PhiloxStream& rng) {
  const double x = sample_perturbation_value(pspec_, rng);
  const double v = variance_at_shift(x);
  return std::sqrt(v) * rng.next_normal();
}

double sample_limit_law(const CovarianceModel& m, double u,
                        const PerturbationSpec& pspec, std::uint64_t seed) {
  ThetaSampler sampler(m, u, pspec);
  PhiloxStream rng(seed, kLaneLimitLaw);
  return sampler.sample(rng);
}

}  // namespace excur
