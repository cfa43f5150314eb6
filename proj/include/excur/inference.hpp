#pragma once

#include "excur/covariance.hpp"
#include "excur/perturbation.hpp"

#include <utility>

namespace excur {

struct EpsilonEstimate {
  double u = 0.0;
  double eps_hat = 0.0;  // estimate of eps^2 E[X^2]
  double sigma2 = 0.0;   // asymptotic variance of the estimator
  double area_t = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// target of the estimator: the scaled area-density excess at level u; equals
// eps^2 E[X^2] exactly under the second-order expansion. Requires a
// unit-variance field and u != 0.
double epsilon_target(const CovarianceModel& model, double u,
                      const PerturbationSpec& pspec);

// plug-in estimator from a bias-corrected area density
double estimate_epsilon(double c2_hat, double u);

// 8 pi e^{u^2} v(u) / u^2; diverges as u -> 0
double epsilon_asymptotic_variance(const CovarianceModel& model, double u);

// central interval est +- z * sqrt(sigma2 / area_t)
std::pair<double, double> confidence_interval(double est, double sigma2,
                                              double area_t, double level);

// u = 0 variant targeting eps^3 E[X^3]: -6 sqrt(2 pi) (c2_hat - 1/2). The
// quadratic term vanishes at the origin, leaving the cubic one.
double estimate_cubic(double c2_hat_at_0);

}  // namespace excur
