#pragma once

#include "excur/rng.hpp"

namespace excur {

enum class PerturbLaw { Degenerate, Skellam, StudentT };

// Spatially invariant pixel shift f = g + eps * X. X is centered with finite
// third absolute moment; the supported laws guarantee both by construction.
struct PerturbationSpec {
  PerturbLaw law = PerturbLaw::Degenerate;
  double epsilon = 0.0;
  double mu1 = 1.0;  // Skellam rates; equality enforces E[X] = 0
  double mu2 = 1.0;
  double nu = 5.0;   // Student-t degrees of freedom, > 3 for E|X|^3 < inf

  double m2() const;     // E[X^2]
  double m3() const;     // E[X^3], zero for every supported law
  double m3abs() const;  // E[|X|^3]

  void validate() const;
};

PerturbationSpec degenerate_perturbation();
PerturbationSpec skellam_perturbation(double epsilon, double mu);
PerturbationSpec student_t_perturbation(double epsilon, double nu);

// one draw of X (not scaled by epsilon)
double sample_perturbation_value(const PerturbationSpec& spec, PhiloxStream& rng);

// Skellam pmf P(X = k) for rates mu1 = mu2 = mu
double skellam_pmf(double mu, long long k);

// symmetric support bound K with P(|X| > K) <= tail_mass
long long skellam_support_bound(double mu, double tail_mass);

}  // namespace excur
