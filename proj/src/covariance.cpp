#include "excur/covariance.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace excur {

double CovarianceModel::sigma_g() const { return std::sqrt(sigma_g2); }

double CovarianceModel::rho(double s) const {
  return std::exp(-kappa * kappa * s * s);
}

double CovarianceModel::lambda() const { return 2.0 * kappa * kappa * sigma_g2; }

double CovarianceModel::rho_support_radius(double eps) const {
  return std::sqrt(-std::log(eps)) / kappa;
}

void CovarianceModel::validate() const {
  if (!(sigma_g2 > 0.0)) throw std::invalid_argument("sigma_g2 must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
}

CovarianceModel squared_exponential(double sigma_g2, double kappa) {
  CovarianceModel m;
  m.kind = CovKind::SquaredExponential;
  m.sigma_g2 = sigma_g2;
  m.kappa = kappa;
  m.validate();
  return m;
}

double rho_power_integral(const CovarianceModel& m, int n) {
  if (n < 1) throw std::invalid_argument("rho_power_integral: n must be >= 1");
  const double pi = 3.14159265358979323846;
  return pi / (static_cast<double>(n) * m.kappa * m.kappa);
}

double rho_power_integral_quad(const CovarianceModel& m, int n) {
  if (n < 1) throw std::invalid_argument("rho_power_integral_quad: n must be >= 1");
  const double pi = 3.14159265358979323846;
  const double smax = m.rho_support_radius(1e-14);
  auto integrand = [&](double s) {
    return 2.0 * pi * s * std::pow(m.rho(s), n);
  };
  namespace bq = boost::math::quadrature;
  return bq::gauss_kronrod<double, 15>::integrate(integrand, 0.0, smax, 10, 1e-12);
}

double second_spectral_moment(const CovarianceModel& m) { return m.lambda(); }

}  // namespace excur
