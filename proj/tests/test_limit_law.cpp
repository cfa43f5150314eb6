#include "doctest.h"

#include "excur/limit_law.hpp"
#include "excur/gkf.hpp"
#include "excur/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace excur;

namespace {

const CovarianceModel kModel = squared_exponential(1.0, 100.0 / 1024.0);

double npdf(double v, double y) {
  return std::exp(-y * y / (2.0 * v)) / std::sqrt(2.0 * 3.14159265358979323846 * v);
}

}  // namespace

TEST_CASE("variance quadrature against frozen values") {
  CHECK(variance_v(kModel, 0.0) == doctest::Approx(57.0841128057).epsilon(1e-7));
  CHECK(variance_v(kModel, 0.5) == doctest::Approx(46.6934575878).epsilon(1e-7));
  CHECK(variance_v(kModel, 1.0) == doctest::Approx(25.7416037485).epsilon(1e-7));
  CHECK(variance_v(kModel, 1.5) == doctest::Approx(9.78071890671).epsilon(1e-7));
  CHECK(variance_v(kModel, 2.0) == doctest::Approx(2.65957464812).epsilon(1e-7));
  CHECK(variance_v(kModel, 3.0) == doctest::Approx(0.0872178696577).epsilon(1e-7));
}

TEST_CASE("nodal level closed form") {
  CHECK(nodal_variance_arcsine(kModel) ==
        doctest::Approx(variance_v(kModel, 0.0)).epsilon(1e-8));
  const CovarianceModel other = squared_exponential(1.0, 0.05);
  CHECK(nodal_variance_arcsine(other) ==
        doctest::Approx(variance_v(other, 0.0)).epsilon(1e-8));
}

TEST_CASE("series and quadrature forms agree") {
  for (double u : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const double q = variance_v(kModel, u);
    const double s = variance_v_series(kModel, u);
    CHECK(std::abs(s - q) / q < 1e-4);
  }
  // short series: the truncation tail is visible but small
  const double q0 = variance_v(kModel, 0.0);
  const double s60 = variance_v_series(kModel, 0.0, 60);
  CHECK(std::abs(s60 - q0) / q0 > 1e-4);
  CHECK(std::abs(s60 - q0) / q0 < 2e-3);
}

TEST_CASE("variance derivatives") {
  auto [vp05, vpp05] = variance_derivatives(kModel, 0.5);
  CHECK(vp05 == doctest::Approx(-37.4149653321).epsilon(1e-5));
  CHECK(vpp05 == doctest::Approx(-43.9505754647).epsilon(1e-5));

  auto [vp15, vpp15] = variance_derivatives(kModel, 1.5);
  CHECK(vp15 == doctest::Approx(-22.347378679).epsilon(1e-5));
  CHECK(vpp15 == doctest::Approx(37.932515265).epsilon(1e-5));

  auto Cv = [&](double u) { return variance_v(kModel, u, 1e-10); };
  for (double u : {0.5, 1.5, 3.0}) {
    const double h = 1e-4;
    const double fd1 = (Cv(u + h) - Cv(u - h)) / (2 * h);
    const double fd2 = (Cv(u + h) - 2 * Cv(u) + Cv(u - h)) / (h * h);
    auto [vp, vpp] = variance_derivatives(kModel, u);
    CHECK(vp == doctest::Approx(fd1).epsilon(1e-5));
    CHECK(vpp == doctest::Approx(fd2).epsilon(1e-3));
  }

  // v is even in u, so v'(0) = 0
  auto [vp0, vpp0] = variance_derivatives(kModel, 0.0);
  CHECK(std::abs(vp0) < 1e-6);
  CHECK(vpp0 < 0.0);
}

TEST_CASE("expansion coefficients against frozen values") {
  struct Row {
    double u, eps, g1, g2;
  };
  const Row skellam_rows[] = {
      {1.5, 0.1, 0.039154, 0.027424}, {1.5, 0.3, 0.352384, 0.246813},
      {1.5, 0.5, 0.978844, 0.685593}, {3.0, 0.1, 0.112660, 0.100270},
      {3.0, 0.3, 1.013944, 0.902429}, {3.0, 0.5, 2.816510, 2.506749}};
  for (const Row& row : skellam_rows) {
    auto [g1, g2] = gamma_coefficients(kModel, row.u,
                                       skellam_perturbation(row.eps, 1.0));
    CHECK(g1 == doctest::Approx(row.g1).epsilon(1e-3));
    CHECK(g2 == doctest::Approx(row.g2).epsilon(1e-3));
  }

  const Row student_rows[] = {{1.5, 0.1, 0.032628, 0.022853},
                              {1.5, 0.5, 0.815703, 0.571327},
                              {3.0, 0.1, 0.093884, 0.083558},
                              {3.0, 0.5, 2.347092, 2.088957}};
  for (const Row& row : student_rows) {
    auto [g1, g2] = gamma_coefficients(kModel, row.u,
                                       student_t_perturbation(row.eps, 5.0));
    CHECK(g1 == doctest::Approx(row.g1).epsilon(1e-3));
    CHECK(g2 == doctest::Approx(row.g2).epsilon(1e-3));
  }

  // both coefficients scale as eps^2
  auto [a1, a2] = gamma_coefficients(kModel, 1.5, skellam_perturbation(0.1, 1.0));
  auto [b1, b2] = gamma_coefficients(kModel, 1.5, skellam_perturbation(0.2, 1.0));
  CHECK(b1 == doctest::Approx(4.0 * a1).epsilon(1e-10));
  CHECK(b2 == doctest::Approx(4.0 * a2).epsilon(1e-10));

  const LimitLawParams p = limit_law_params(kModel, 1.5, skellam_perturbation(0.5, 1.0));
  CHECK(p.v == doctest::Approx(9.78071890671).epsilon(1e-4));
  CHECK(p.gamma1 == doctest::Approx(0.978844).epsilon(1e-3));
  CHECK(p.gamma2 == doctest::Approx(0.685593).epsilon(1e-3));
}

TEST_CASE("component densities") {
  const double v = 9.78071890671;
  // delta = 0 is the centered normal with variance v
  for (double y : {0.0, 0.7, 2.0, -4.4})
    CHECK(bep_density(v, 0, y) == doctest::Approx(npdf(v, y)).epsilon(1e-12));
  // higher components vanish at the origin
  CHECK(bep_density(v, 2, 0.0) == doctest::Approx(0.0));
  CHECK(bep_density(v, 4, 0.0) == doctest::Approx(0.0));

  // each component integrates to one; second moments are v, 3v, 5v
  const int n = 40001;
  const double half = 14.0 * std::sqrt(v);
  for (int delta : {0, 2, 4}) {
    double mass = 0.0, m2 = 0.0;
    double prev_y = -half, prev_f = bep_density(v, delta, -half);
    for (int i = 1; i < n; ++i) {
      const double y = -half + 2.0 * half * i / (n - 1);
      const double f = bep_density(v, delta, y);
      mass += 0.5 * (f + prev_f) * (y - prev_y);
      m2 += 0.5 * (f * y * y + prev_f * prev_y * prev_y) * (y - prev_y);
      prev_y = y;
      prev_f = f;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(m2 == doctest::Approx((delta + 1.0) * v).epsilon(1e-6));
  }

  CHECK_THROWS_AS(bep_density(v, 1, 0.5), std::domain_error);
  CHECK_THROWS_AS(bep_density(v, 6, 0.5), std::domain_error);
  CHECK_THROWS_AS(bep_density(0.0, 0, 0.5), std::domain_error);
}

TEST_CASE("truncated density: normalization, shape, diagnostics") {
  const PerturbationSpec sk05 = skellam_perturbation(0.5, 1.0);
  const LimitLawParams p = limit_law_params(kModel, 1.5, sk05);

  // mixture weights sum to one by construction, so the integral is one
  const DensityDiagnostics diag = truncated_density_diagnostics(p, 25.0, 20001);
  CHECK(diag.integral == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(diag.min_value > -1e-12);

  CHECK(truncated_limit_density(p, 0.0) == doctest::Approx(0.16497105).epsilon(1e-4));
  CHECK(truncated_limit_density(kModel, 1.5, sk05, 1.0) ==
        doctest::Approx(truncated_limit_density(p, 1.0)).epsilon(1e-12));

  // symmetric in y
  for (double y : {0.3, 1.7, 5.0})
    CHECK(truncated_limit_density(p, y) ==
          doctest::Approx(truncated_limit_density(p, -y)).epsilon(1e-13));

  // strong perturbation at u = 1.5 splits the density into three local modes
  int maxima = 0;
  const int n = 4001;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i)
    vals[static_cast<std::size_t>(i)] =
        truncated_limit_density(p, -12.0 + 24.0 * i / (n - 1));
  for (int i = 1; i + 1 < n; ++i)
    if (vals[static_cast<std::size_t>(i)] > vals[static_cast<std::size_t>(i - 1)] &&
        vals[static_cast<std::size_t>(i)] > vals[static_cast<std::size_t>(i + 1)])
      ++maxima;
  CHECK(maxima == 3);

  // far in the tail of the expansion the truncation goes negative
  const LimitLawParams ptail = limit_law_params(kModel, 3.0, sk05);
  const DensityDiagnostics dtail = truncated_density_diagnostics(ptail, 3.0, 6001);
  CHECK(dtail.min_value < 0.0);
  CHECK(dtail.min_value == doctest::Approx(-0.825136).epsilon(1e-3));
  // still integrates to one over a wide window
  const DensityDiagnostics dtail_wide = truncated_density_diagnostics(ptail, 10.0, 40001);
  CHECK(dtail_wide.integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("exact mixture density and cdf") {
  // no perturbation: the mixture collapses to a single gaussian
  const PerturbationSpec none = degenerate_perturbation();
  const double v15 = variance_v_series(kModel, 1.5);
  for (double y : {0.0, 1.0, 3.5}) {
    CHECK(exact_mixture_density(kModel, 1.5, none, y) ==
          doctest::Approx(npdf(v15, y)).epsilon(1e-10));
  }
  CHECK(exact_mixture_cdf(kModel, 1.5, none, 0.0) == doctest::Approx(0.5).epsilon(1e-12));

  const PerturbationSpec sk = skellam_perturbation(0.5, 1.0);
  CHECK(exact_mixture_density(kModel, 1.5, sk, 0.5) ==
        doctest::Approx(0.1628018819).epsilon(1e-5));
  CHECK(exact_mixture_density(kModel, 1.5, sk, 1.0) ==
        doctest::Approx(0.1252831291).epsilon(1e-5));
  CHECK(exact_mixture_density(kModel, 1.5, sk, 2.0) ==
        doctest::Approx(0.0810234938).epsilon(1e-5));
  CHECK(exact_mixture_density(kModel, 1.5, sk, 5.0) ==
        doctest::Approx(0.02762318486).epsilon(1e-5));
  // unbounded perturbations make v(u - eps X) arbitrarily small with
  // positive probability, so the density blows up at the origin
  CHECK(std::isinf(exact_mixture_density(kModel, 1.5, sk, 0.0)));

  CHECK(exact_mixture_cdf(kModel, 1.5, sk, 0.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(exact_mixture_cdf(kModel, 1.5, sk, 0.5) ==
        doctest::Approx(0.5984600539).epsilon(1e-6));
  CHECK(exact_mixture_cdf(kModel, 1.5, sk, 2.0) ==
        doctest::Approx(0.7703300241).epsilon(1e-6));
  CHECK(exact_mixture_cdf(kModel, 1.5, sk, 5.0) ==
        doctest::Approx(0.9171196884).epsilon(1e-6));

  CHECK(expected_mixture_variance(kModel, 1.5, sk) ==
        doctest::Approx(15.53873).epsilon(1e-5));
  CHECK(expected_mixture_variance(kModel, 1.5, none) ==
        doctest::Approx(v15).epsilon(1e-10));
}

TEST_CASE("truncated density converges to the exact mixture as eps shrinks") {
  // g2_scale = 1 keeps the shipped gamma2 (coefficient 1/(2 sqrt 2));
  // g2_scale = 1/sqrt(2) turns it into the plain quarter coefficient
  auto sup_gap = [&](double eps, double g2_scale) {
    const PerturbationSpec sk = skellam_perturbation(eps, 1.0);
    LimitLawParams p = limit_law_params(kModel, 1.5, sk);
    p.gamma2 *= g2_scale;
    double worst = 0.0;
    for (double y = 0.25; y <= 12.0; y += 0.125) {
      const double gap =
          std::abs(exact_mixture_density(kModel, 1.5, sk, y) -
                   truncated_limit_density(p, y));
      worst = std::max(worst, gap);
    }
    return worst;
  };

  const double d4 = sup_gap(0.4, 1.0);
  const double d2 = sup_gap(0.2, 1.0);
  const double d1 = sup_gap(0.1, 1.0);
  CHECK(d2 < d4);
  CHECK(d1 < d2);
  // decays strictly faster than eps^2 in each halving
  CHECK(std::log2(d4 / d2) > 1.8);
  CHECK(std::log2(d2 / d1) > 1.8);

  // the quarter coefficient cancels the next order too
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  const double a2 = sup_gap(0.2, inv_rt2);
  const double a1 = sup_gap(0.1, inv_rt2);
  CHECK(std::log2(a2 / a1) > 2.8);
  CHECK(a1 < d1);
}

TEST_CASE("limit law sampler") {
  const PerturbationSpec sk = skellam_perturbation(0.5, 1.0);
  ThetaSampler sampler(kModel, 1.5, sk);

  // atom variances agree with direct series evaluation
  CHECK(sampler.variance_at_shift(0.0) ==
        doctest::Approx(variance_v_series(kModel, 1.5)).epsilon(1e-12));
  CHECK(sampler.variance_at_shift(2.0) ==
        doctest::Approx(variance_v_series(kModel, 0.5)).epsilon(1e-12));

  PhiloxStream rng(20240811, kLaneLimitLaw);
  const int n = 100000;
  std::vector<double> draws(n);
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = sampler.sample(rng);
    draws[static_cast<std::size_t>(i)] = t;
    s1 += t;
    s2 += t * t;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  const double target = expected_mixture_variance(kModel, 1.5, sk);
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - target) / target < 0.02);

  // one-sample KS against the integrated mixture cdf
  ThetaSampler atoms(kModel, 1.5, sk);
  std::vector<double> pk;
  std::vector<double> vk;
  const long long kmax = skellam_support_bound(1.0, 1e-12);
  double mass = 0.0;
  for (long long k = -kmax; k <= kmax; ++k) {
    const double w = skellam_pmf(1.0, k);
    pk.push_back(w);
    vk.push_back(atoms.variance_at_shift(static_cast<double>(k)));
    mass += w;
  }
  auto cdf = [&](double y) {
    double c = 0.0;
    for (std::size_t i = 0; i < pk.size(); ++i)
      c += pk[i] * (1.0 - gaussian_tail(y / std::sqrt(vk[i])));
    return c / mass;
  };
  // spot-check the fast atom cdf against the library evaluation
  for (double y : {-2.0, 0.5, 4.0})
    CHECK(cdf(y) == doctest::Approx(exact_mixture_cdf(kModel, 1.5, sk, y)).epsilon(1e-9));
  const double ks = ks_statistic_one_sample(draws, cdf);
  CHECK(ks < 0.01);

  // deterministic in the seed
  CHECK(sample_limit_law(kModel, 1.5, sk, 99) ==
        doctest::Approx(sample_limit_law(kModel, 1.5, sk, 99)).epsilon(0.0));
  CHECK(sample_limit_law(kModel, 1.5, sk, 99) !=
        sample_limit_law(kModel, 1.5, sk, 100));
}

TEST_CASE("student t mixture variance within sampling error") {
  const PerturbationSpec st = student_t_perturbation(1.0, 5.0);
  ThetaSampler sampler(kModel, 1.5, st);
  PhiloxStream rng(555, kLaneLimitLaw);
  const int n = 60000;
  double s2 = 0.0;
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) {
    const double t = sampler.sample(rng);
    s2 += t * t;
    sq[static_cast<std::size_t>(i)] = t * t;
  }
  const double var = s2 / n;
  const double target = expected_mixture_variance(kModel, 1.5, st);
  const double se = std::sqrt(sample_variance(sq) / n);
  CHECK(std::abs(var - target) < 3.0 * se);
}
