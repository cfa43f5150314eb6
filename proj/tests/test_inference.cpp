#include "doctest.h"

#include "excur/gkf.hpp"
#include "excur/inference.hpp"
#include "excur/limit_law.hpp"

#include <cmath>
#include <stdexcept>

using namespace excur;

namespace {
const CovarianceModel kModel = squared_exponential(1.0, 100.0 / 1024.0);
}

TEST_CASE("the estimator inverts the expansion exactly") {
  // plugging the expanded area density back in returns eps^2 E[X^2] to
  // rounding, at every level and for every law
  for (double u : {0.5, 1.0, 1.5, 2.0, 3.0, -1.2}) {
    for (double eps : {0.1, 0.3, 0.5}) {
      const PerturbationSpec sk = skellam_perturbation(eps, 1.0);
      const double e2m2 = eps * eps * sk.m2();
      CHECK(epsilon_target(kModel, u, sk) == doctest::Approx(e2m2).epsilon(1e-11));

      const double c2 = perturbed_densities(kModel, u, e2m2).c2;
      CHECK(estimate_epsilon(c2, u) == doctest::Approx(e2m2).epsilon(1e-11));

      const PerturbationSpec st = student_t_perturbation(eps, 5.0);
      CHECK(epsilon_target(kModel, u, st) ==
            doctest::Approx(eps * eps * st.m2()).epsilon(1e-11));
    }
  }
}

TEST_CASE("estimator prefactor") {
  // slope of the estimate in the measured area density
  const double q3 = estimate_epsilon(gaussian_tail(3.0) + 1e-3, 3.0) -
                    estimate_epsilon(gaussian_tail(3.0), 3.0);
  CHECK(q3 == doctest::Approx(1e-3 * 150.4263243).epsilon(1e-8));
  CHECK(estimate_epsilon(gaussian_tail(1.5), 1.5) == doctest::Approx(0.0));

  // negative levels flip the sign of the prefactor
  const double qm = estimate_epsilon(gaussian_tail(-1.5) + 1e-3, -1.5) -
                    estimate_epsilon(gaussian_tail(-1.5), -1.5);
  CHECK(qm < 0.0);
}

TEST_CASE("applied to the exact mean area the estimate lands on eps_u") {
  // the exact (unexpanded) mean area gives the eps_u values the estimator
  // concentrates around; they sit close to eps^2 E[X^2] but not on it
  const double u = 1.5;
  struct Row { double eps, eps_u; };
  const Row rows[] = {{0.1, 0.019911}, {0.2, 0.078536}, {0.3, 0.172347},
                      {0.4, 0.295369}, {0.5, 0.439983}};
  for (const Row& r : rows) {
    const PerturbationSpec sk = skellam_perturbation(r.eps, 1.0);
    const double mean_area = exact_mean_area_fraction(kModel, u, sk);
    CHECK(estimate_epsilon(mean_area, u) == doctest::Approx(r.eps_u).epsilon(1e-4));
  }
  // the expansion gap grows with eps
  CHECK(std::abs(rows[0].eps_u - 0.02) < 1e-4);
  CHECK(std::abs(rows[4].eps_u - 0.50) > 0.05);
}

TEST_CASE("level zero is rejected") {
  CHECK_THROWS_AS(estimate_epsilon(0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(epsilon_target(kModel, 0.0, skellam_perturbation(0.1, 1.0)),
                  std::domain_error);
  CHECK_THROWS_AS(epsilon_asymptotic_variance(kModel, 0.0), std::domain_error);
}

TEST_CASE("non-unit field variance is rejected") {
  const CovarianceModel scaled = squared_exponential(2.0, 0.1);
  CHECK_THROWS_AS(epsilon_target(scaled, 1.5, skellam_perturbation(0.1, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(epsilon_asymptotic_variance(scaled, 1.5), std::invalid_argument);
}

TEST_CASE("asymptotic variance of the estimate") {
  CHECK(epsilon_asymptotic_variance(kModel, 1.5) ==
        doctest::Approx(1036.550398).epsilon(1e-6));
  CHECK(epsilon_asymptotic_variance(kModel, 3.0) ==
        doctest::Approx(1973.567951).epsilon(1e-6));

  // even in u
  CHECK(epsilon_asymptotic_variance(kModel, -1.5) ==
        doctest::Approx(epsilon_asymptotic_variance(kModel, 1.5)).epsilon(1e-10));

  // blows up toward the excluded origin
  CHECK(epsilon_asymptotic_variance(kModel, 0.1) >
        epsilon_asymptotic_variance(kModel, 0.5));
  CHECK(epsilon_asymptotic_variance(kModel, 0.5) >
        epsilon_asymptotic_variance(kModel, 1.0));
}

TEST_CASE("confidence intervals") {
  const auto [lo, hi] = confidence_interval(1.0, 4.0, 400.0, 0.95);
  const double half = 1.9599639845400545 * std::sqrt(4.0 / 400.0);
  CHECK(lo == doctest::Approx(1.0 - half).epsilon(1e-12));
  CHECK(hi == doctest::Approx(1.0 + half).epsilon(1e-12));

  // wider at higher confidence
  const auto [lo99, hi99] = confidence_interval(1.0, 4.0, 400.0, 0.99);
  CHECK(hi99 - lo99 > hi - lo);

  // collapses as the window grows
  const auto [lo_big, hi_big] = confidence_interval(1.0, 4.0, 1e12, 0.95);
  CHECK(hi_big - lo_big < 1e-5);

  CHECK_THROWS_AS(confidence_interval(1.0, 4.0, 400.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(confidence_interval(1.0, 4.0, 400.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(confidence_interval(1.0, 4.0, 0.0, 0.95), std::invalid_argument);
}

TEST_CASE("cubic estimator at the origin") {
  CHECK(estimate_cubic(0.5) == doctest::Approx(0.0));

  // symmetric perturbations leave the area density at 1/2
  const PerturbationSpec sk = skellam_perturbation(0.3, 1.0);
  const double symmetric_area = exact_mean_area_fraction(kModel, 0.0, sk);
  CHECK(estimate_cubic(symmetric_area) == doctest::Approx(0.0).epsilon(1e-9));

  // skewed X with E[X]=0, E[X^2]=1, E[X^3]=1 at eps = 0.3: frozen value of
  // -6 sqrt(2 pi) (E[Psi(-eps X)] - 1/2)
  const double mean_area =
      (1.0 / 6.0) * gaussian_tail(-0.3 * 2.0) +
      (1.0 / 2.0) * gaussian_tail(0.0) +
      (1.0 / 3.0) * gaussian_tail(-0.3 * -1.0);
  CHECK(mean_area == doctest::Approx(0.498320673).epsilon(1e-8));
  CHECK(estimate_cubic(mean_area) == doctest::Approx(0.025256692).epsilon(1e-6));

  // close to, but distinct from, the leading eps^3 E[X^3] term
  CHECK(std::abs(estimate_cubic(mean_area) - 0.027) < 0.002);
}
