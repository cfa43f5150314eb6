#include "doctest.h"

#include "excur/gkf.hpp"

#include <cmath>
#include <stdexcept>

using namespace excur;

namespace {
const CovarianceModel kModel = squared_exponential(1.0, 100.0 / 1024.0);
}

TEST_CASE("gaussian tail values and symmetry") {
  CHECK(gaussian_tail(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gaussian_tail(1.5) == doctest::Approx(0.066807201268858071).epsilon(1e-13));
  CHECK(gaussian_tail(3.0) == doctest::Approx(0.0013498980316300933).epsilon(1e-12));
  for (double x : {-2.7, -0.4, 0.9, 3.3})
    CHECK(gaussian_tail(-x) == doctest::Approx(1.0 - gaussian_tail(x)).epsilon(1e-14));
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
}

TEST_CASE("tail derivatives match finite differences") {
  const double h = 1e-5;
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    const double fd1 = (gaussian_tail(x + h) - gaussian_tail(x - h)) / (2 * h);
    CHECK(gaussian_tail_d1(x) == doctest::Approx(fd1).epsilon(1e-6));

    const double fd2 = (gaussian_tail_d1(x + h) - gaussian_tail_d1(x - h)) / (2 * h);
    CHECK(gaussian_tail_d2(x) == doctest::Approx(fd2).epsilon(1e-6));

    const double fd3 = (gaussian_tail_d2(x + h) - gaussian_tail_d2(x - h)) / (2 * h);
    CHECK(gaussian_tail_d3(x) - fd3 == doctest::Approx(0.0).epsilon(1e-8));

    const double fd4 = (gaussian_tail_d3(x + h) - gaussian_tail_d3(x - h)) / (2 * h);
    CHECK(gaussian_tail_d4(x) - fd4 == doctest::Approx(0.0).epsilon(1e-7));
  }
}

TEST_CASE("gaussian curvature densities") {
  const CurvatureDensities d0 = curvature_densities(kModel, 0.0);
  CHECK(d0.c2 == doctest::Approx(0.5).epsilon(1e-14));
  // sqrt(lambda)/4 with lambda = 2 kappa^2
  CHECK(d0.c1 == doctest::Approx(0.034526698300124390).epsilon(1e-12));
  CHECK(d0.c0 == doctest::Approx(0.0));

  const CurvatureDensities d3 = curvature_densities(kModel, 3.0);
  CHECK(d3.c0 == doctest::Approx(4.0360484035142913e-05).epsilon(1e-10));
  CHECK(d3.c2 == doctest::Approx(gaussian_tail(3.0)).epsilon(1e-14));

  // negative levels: area density above 1/2, positive euler density again
  const CurvatureDensities dm = curvature_densities(kModel, -2.0);
  CHECK(dm.c2 > 0.5);
  CHECK(dm.c0 < 0.0);

  // scale invariance in sigma_g: density at u for sd sigma equals density
  // at u/sigma for the unit-variance model, up to the lambda factors
  const CovarianceModel scaled = squared_exponential(4.0, 100.0 / 1024.0);
  CHECK(curvature_densities(scaled, 3.0).c2 ==
        doctest::Approx(gaussian_tail(1.5)).epsilon(1e-14));
}

TEST_CASE("perturbed densities") {
  // eps^2 E[X^2] = 0 reduces to the pure gaussian densities
  const CurvatureDensities g = curvature_densities(kModel, 1.2);
  const CurvatureDensities p0 = perturbed_densities(kModel, 1.2, 0.0);
  CHECK(p0.c0 == doctest::Approx(g.c0).epsilon(1e-15));
  CHECK(p0.c1 == doctest::Approx(g.c1).epsilon(1e-15));
  CHECK(p0.c2 == doctest::Approx(g.c2).epsilon(1e-15));

  // frozen value at u = 1.5 with eps^2 E[X^2] = 0.5
  const CurvatureDensities p = perturbed_densities(kModel, 1.5, 0.5);
  CHECK(p.c2 == doctest::Approx(0.11537629964356746).epsilon(1e-12));

  // area density correction is lambda-free: any kappa gives the same c2
  for (double kap : {0.01, 100.0 / 1024.0, 0.3}) {
    const CovarianceModel m = squared_exponential(1.0, kap);
    CHECK(perturbed_densities(m, 1.5, 0.5).c2 ==
          doctest::Approx(p.c2).epsilon(1e-14));
  }

  // correction is linear in eps^2 E[X^2]
  const double base = curvature_densities(kModel, 2.0).c2;
  const double d1 = perturbed_densities(kModel, 2.0, 0.1).c2 - base;
  const double d2 = perturbed_densities(kModel, 2.0, 0.2).c2 - base;
  CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-10));

  CHECK_THROWS_AS(perturbed_densities(kModel, 1.0, -0.5), std::invalid_argument);
}

TEST_CASE("boundary-corrected means") {
  const GridSpec grid{1024, 1024, 1.0};
  const CurvatureDensities star = curvature_densities(kModel, 0.0);
  const CurvatureDensities e = expected_normalized(star, grid);

  CHECK(e.c2 == doctest::Approx(0.5).epsilon(1e-14));
  // c1 + (|dT|/2|T|) c2 at u = 0
  CHECK(e.c1 == doctest::Approx(0.035503260800124388).epsilon(1e-12));
  CHECK(e.c0 > star.c0);
}

TEST_CASE("bias correction inverts the boundary terms") {
  for (double u : {-1.0, 0.0, 0.7, 2.5}) {
    for (const GridSpec& grid :
         {GridSpec{1024, 1024, 1.0}, GridSpec{64, 256, 0.5}}) {
      const CurvatureDensities star = curvature_densities(kModel, u);
      const CurvatureDensities back = bias_correct(expected_normalized(star, grid), grid);
      CHECK(back.c0 == doctest::Approx(star.c0).epsilon(1e-12));
      CHECK(back.c1 == doctest::Approx(star.c1).epsilon(1e-12));
      CHECK(back.c2 == doctest::Approx(star.c2).epsilon(1e-12));
    }
  }
}
