#include "excur/perturbation.hpp"

#include <cmath>
#include <stdexcept>

namespace excur {

double PerturbationSpec::m2() const {
  switch (law) {
    case PerturbLaw::Degenerate: return 0.0;
    case PerturbLaw::Skellam: return mu1 + mu2;
    case PerturbLaw::StudentT: return nu / (nu - 2.0);
  }
  return 0.0;
}

double PerturbationSpec::m3() const { return 0.0; }

double PerturbationSpec::m3abs() const {
  switch (law) {
    case PerturbLaw::Degenerate:
      return 0.0;
    case PerturbLaw::Skellam: {
      const double mu = mu1;
      double total = 0.0;
      const long long kmax = skellam_support_bound(mu, 1e-14);
      for (long long k = 1; k <= kmax; ++k) {
        const double ak = static_cast<double>(k);
        total += 2.0 * ak * ak * ak * skellam_pmf(mu, k);
      }
      return total;
    }
    case PerturbLaw::StudentT: {
      // E|T|^3 = nu^{3/2} Gamma(2) Gamma((nu-3)/2) / (sqrt(pi) Gamma(nu/2))
      const double pi = 3.14159265358979323846;
      return std::pow(nu, 1.5) *
             std::exp(std::lgamma(0.5 * (nu - 3.0)) - std::lgamma(0.5 * nu)) /
             std::sqrt(pi);
    }
  }
  return 0.0;
}

void PerturbationSpec::validate() const {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  switch (law) {
    case PerturbLaw::Degenerate:
      break;
    case PerturbLaw::Skellam:
      if (!(mu1 > 0.0) || mu1 != mu2)
        throw std::invalid_argument("Skellam perturbation needs mu1 = mu2 > 0");
      break;
    case PerturbLaw::StudentT:
      if (!(nu > 3.0))
        throw std::invalid_argument("Student-t perturbation needs nu > 3");
      break;
  }
}

PerturbationSpec degenerate_perturbation() {
  PerturbationSpec s;
  s.law = PerturbLaw::Degenerate;
  s.epsilon = 0.0;
  return s;
}

PerturbationSpec skellam_perturbation(double epsilon, double mu) {
  PerturbationSpec s;
  s.law = PerturbLaw::Skellam;
  s.epsilon = epsilon;
  s.mu1 = mu;
  s.mu2 = mu;
  s.validate();
  return s;
}

PerturbationSpec student_t_perturbation(double epsilon, double nu) {
  PerturbationSpec s;
  s.law = PerturbLaw::StudentT;
  s.epsilon = epsilon;
  s.nu = nu;
  s.validate();
  return s;
}

double sample_perturbation_value(const PerturbationSpec& spec, PhiloxStream& rng) {
  spec.validate();
  switch (spec.law) {
    case PerturbLaw::Degenerate:
      return 0.0;
    case PerturbLaw::Skellam:
      return static_cast<double>(rng.next_skellam(spec.mu1, spec.mu2));
    case PerturbLaw::StudentT:
      return rng.next_student_t(spec.nu);
  }
  return 0.0;
}

double skellam_pmf(double mu, long long k) {
  if (!(mu > 0.0)) throw std::invalid_argument("skellam_pmf: mu must be > 0");
  const double order = static_cast<double>(k < 0 ? -k : k);
  return std::exp(-2.0 * mu) * std::cyl_bessel_i(order, 2.0 * mu);
}

long long skellam_support_bound(double mu, double tail_mass) {
  double cum = skellam_pmf(mu, 0);
  long long k = 0;
  while (cum < 1.0 - tail_mass && k < 4096) {
    ++k;
    cum += 2.0 * skellam_pmf(mu, k);
  }
  return k;
}

}  // namespace excur
