#pragma once

#include <stdexcept>

namespace excur {

enum class CovKind { SquaredExponential };

// Stationary isotropic covariance r(t) = sigma_g^2 * rho(|t|).
// Lengths are in pixel units; physical spacing lives in GridSpec.
struct CovarianceModel {
  CovKind kind = CovKind::SquaredExponential;
  double sigma_g2 = 1.0;   // variance of g(0)
  double kappa = 100.0 / 1024.0;  // inverse length scale of exp(-kappa^2 s^2)

  double sigma_g() const;

  // correlation rho(s) = r(s)/sigma_g^2, s >= 0
  double rho(double s) const;

  // covariance r(s)
  double r(double s) const { return sigma_g2 * rho(s); }

  // second spectral moment: Var of each partial derivative of g at a point.
  // For the squared-exponential this is 2 kappa^2 sigma_g^2.
  double lambda() const;

  // radius beyond which rho(s) < eps, used to truncate radial integrals
  double rho_support_radius(double eps = 1e-14) const;

  void validate() const;
};

CovarianceModel squared_exponential(double sigma_g2, double kappa);

// integral of rho(|t|)^n over the plane; closed form pi/(n kappa^2) for the
// squared-exponential family
double rho_power_integral(const CovarianceModel& m, int n);

// same integral by radial quadrature, kept as an independent oracle
double rho_power_integral_quad(const CovarianceModel& m, int n);

// -d^2/ds^2 r(s) at s=0 (equals lambda())
double second_spectral_moment(const CovarianceModel& m);

}  // namespace excur
