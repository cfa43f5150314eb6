#include "excur/inference.hpp"

#include "excur/gkf.hpp"
#include "excur/limit_law.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <stdexcept>

namespace excur {

namespace {
constexpr double kPi = 3.14159265358979323846;

double estimator_prefactor(double u) {
  if (u == 0.0)
    throw std::domain_error(
        "level u = 0 is excluded: the area density is insensitive to eps^2 "
        "there; use estimate_cubic instead");
  return 2.0 * std::sqrt(2.0 * kPi) * std::exp(0.5 * u * u) / u;
}

void require_unit_variance(const CovarianceModel& model) {
  if (model.sigma_g2 != 1.0)
    throw std::invalid_argument(
        "epsilon estimation requires sigma_g^2 = 1; rescale the field and "
        "level by sigma_g first");
}

}  // namespace

double epsilon_target(const CovarianceModel& model, double u,
                      const PerturbationSpec& pspec) {
  require_unit_variance(model);
  pspec.validate();
  const double e2m2 = pspec.epsilon * pspec.epsilon * pspec.m2();
  const double c2_f = perturbed_densities(model, u, e2m2).c2;
  return estimator_prefactor(u) * (c2_f - gaussian_tail(u));
}

double estimate_epsilon(double c2_hat, double u) {
  return estimator_prefactor(u) * (c2_hat - gaussian_tail(u));
}

double epsilon_asymptotic_variance(const CovarianceModel& model, double u) {
  require_unit_variance(model);
  if (u == 0.0)
    throw std::domain_error("asymptotic variance diverges at u = 0");
  return 8.0 * kPi * std::exp(u * u) * variance_v(model, u) / (u * u);
}

std::pair<double, double> confidence_interval(double est, double sigma2,
                                              double area_t, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level must lie in (0,1)");
  if (!(area_t > 0.0)) throw std::invalid_argument("area must be positive");
  boost::math::normal_distribution<double> normal(0.0, 1.0);
  const double z = boost::math::quantile(normal, 0.5 * (1.0 + level));
  const double half = z * std::sqrt(sigma2 / area_t);
  return {est - half, est + half};
}

double estimate_cubic(double c2_hat_at_0) {
  return -6.0 * std::sqrt(2.0 * kPi) * (c2_hat_at_0 - 0.5);
}

}  // namespace excur
