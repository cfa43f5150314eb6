#pragma once

#include "excur/covariance.hpp"
#include "excur/perturbation.hpp"
#include "excur/rng.hpp"

#include <cstdint>
#include <unordered_map>
#include <utility>

namespace excur {

// Asymptotic variance of the normalized excursion-area fluctuation at level
// u, with its u-derivatives and the expansion coefficients of the truncated
// limit density.
struct LimitLawParams {
  double v = 0.0;
  double vp = 0.0;
  double vpp = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

// double-integral form, radial reduction with the arcsine substitution that
// removes the endpoint singularity of (1 - r^2)^{-1/2}
double variance_v(const CovarianceModel& m, double u, double tol = 1e-9);

// closed form of variance_v at u = 0: integral of arcsin(rho(|t|))/(2 pi)
double nodal_variance_arcsine(const CovarianceModel& m, double tol = 1e-10);

// Hermite-series form; sums at most n_terms, stopping early once the
// (nonnegative) terms stay below 1e-14 of the partial sum for 8 consecutive
// indices past a floor of 200. Zero terms occur at Hermite roots, hence the
// consecutive-run requirement.
double variance_v_series(const CovarianceModel& m, double u, int n_terms = 2000);

// (v'(u), v''(u)) by differentiating under the integral sign
std::pair<double, double> variance_derivatives(const CovarianceModel& m,
                                               double u, double tol = 1e-9);

// gamma1 = (3/8) eps^2 E[X^2] (v'/v)^2, gamma2 = eps^2 E[X^2] v''/(2 sqrt(2) v)
std::pair<double, double> gamma_coefficients(const CovarianceModel& m, double u,
                                             const PerturbationSpec& pspec);

LimitLawParams limit_law_params(const CovarianceModel& m, double u,
                                const PerturbationSpec& pspec);

// bimodal exponential power component: |y/sqrt(2v)|^delta exp(-y^2/(2v))
// normalized by sqrt(2v) Gamma((delta+1)/2); delta must be 0, 2, or 4
double bep_density(double v, int delta, double y);

// h-tilde: (1 + g1 - g2) f0 + (g2 - 2 g1) f2 + g1 f4, all components sharing
// v(u). A truncated expansion: it integrates to one but can dip negative for
// large gamma.
double truncated_limit_density(const LimitLawParams& p, double y);
double truncated_limit_density(const CovarianceModel& m, double u,
                               const PerturbationSpec& pspec, double y);

struct DensityDiagnostics {
  double integral = 0.0;   // trapezoid over the scanned window
  double min_value = 0.0;  // most negative value seen (diagnostic, not clamped)
  double min_location = 0.0;
};

DensityDiagnostics truncated_density_diagnostics(const LimitLawParams& p,
                                                 double half_range,
                                                 int n_points);

// evaluation controls for the exact Gaussian variance mixture over X
struct MixtureEval {
  double tail_mass = 1e-12;  // discrete support truncation
  double quad_tol = 1e-9;    // continuous-X quadrature tolerance
  int series_terms = 2000;   // terms for each interior v evaluation
};

// h_eps(y) = E[ phi(v(u - eps X), y) ]. For unbounded X this density
// diverges at y = 0 (the mixture puts arbitrarily small variances near the
// origin); the function returns +infinity there.
double exact_mixture_density(const CovarianceModel& m, double u,
                             const PerturbationSpec& pspec, double y,
                             const MixtureEval& eval = {});

// P(Theta_eps(u) <= y) = E[ Phi(y / sqrt(v(u - eps X))) ]
double exact_mixture_cdf(const CovarianceModel& m, double u,
                         const PerturbationSpec& pspec, double y,
                         const MixtureEval& eval = {});

// E[ v(u - eps X) ], the second moment of Theta_eps(u)
double expected_mixture_variance(const CovarianceModel& m, double u,
                                 const PerturbationSpec& pspec,
                                 const MixtureEval& eval = {});

// E[ Psi((u - eps X)/sigma_g) ]: the exact perturbed mean area fraction,
// with no expansion in eps
double exact_mean_area_fraction(const CovarianceModel& m, double u,
                                const PerturbationSpec& pspec,
                                const MixtureEval& eval = {});

// Draws of Theta_eps(u) = sqrt(v(u - eps X)) Z. Per draw: X first, then Z,
// so streams stay aligned across laws. Integer-atom variances are memoized.
class ThetaSampler {
 public:
  ThetaSampler(const CovarianceModel& m, double u, const PerturbationSpec& pspec,
               int series_terms = 2000);

  double sample(PhiloxStream& rng);
  double variance_at_shift(double x);  // v(u - eps x)

 private:
  CovarianceModel model_;
  double u_ = 0.0;
  PerturbationSpec pspec_;
  int series_terms_ = 2000;
  double v_center_ = 0.0;
  std::unordered_map<long long, double> atom_cache_;
};

// single deterministic draw (stream lane kLaneLimitLaw)
double sample_limit_law(const CovarianceModel& m, double u,
                        const PerturbationSpec& pspec, std::uint64_t seed);

inline constexpr std::uint64_t kLaneField = 0;
inline constexpr std::uint64_t kLanePerturbation = 1;
inline constexpr std::uint64_t kLaneLimitLaw = 2;

}  // namespace excur
