#include "excur/gkf.hpp"

#include <cmath>

namespace excur {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;
}  // namespace

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double gaussian_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double gaussian_tail_d1(double x) { return -normal_pdf(x); }

double gaussian_tail_d2(double x) { return x * normal_pdf(x); }

double gaussian_tail_d3(double x) { return (1.0 - x * x) * normal_pdf(x); }

double gaussian_tail_d4(double x) { return x * (x * x - 3.0) * normal_pdf(x); }

CurvatureDensities curvature_densities(const CovarianceModel& m, double u) {
  m.validate();
  const double sg = m.sigma_g();
  const double ub = u / sg;
  const double lam = m.lambda();
  CurvatureDensities d;
  d.c2 = gaussian_tail(ub);
  d.c1 = -(std::sqrt(2.0 * kPi * lam) / (4.0 * sg)) * gaussian_tail_d1(ub);
  d.c0 = (lam / (2.0 * kPi * m.sigma_g2)) * gaussian_tail_d2(ub);
  return d;
}

CurvatureDensities perturbed_densities(const CovarianceModel& m, double u,
                                       double eps2_m2) {
  m.validate();
  if (eps2_m2 < 0.0) throw std::invalid_argument("eps^2 E[X^2] must be >= 0");
  const double sg = m.sigma_g();
  const double ub = u / sg;
  const double lam = m.lambda();
  // second-order correction: each density picks up
  // (eps^2 E[X^2] / 2 sigma_g^2) times its second u-derivative
  const double h = eps2_m2 / (2.0 * m.sigma_g2);
  CurvatureDensities d;
  d.c2 = gaussian_tail(ub) + h * gaussian_tail_d2(ub);
  d.c1 = -(std::sqrt(2.0 * kPi * lam) / (4.0 * sg)) *
         (gaussian_tail_d1(ub) + h * gaussian_tail_d3(ub));
  d.c0 = (lam / (2.0 * kPi * m.sigma_g2)) *
         (gaussian_tail_d2(ub) + h * gaussian_tail_d4(ub));
  return d;
}

CurvatureDensities expected_normalized(const CurvatureDensities& star,
                                       const GridSpec& grid) {
  grid.validate();
  const double a = grid.boundary_length() / grid.area();
  const double inv_area = 1.0 / grid.area();
  CurvatureDensities e;
  e.c2 = star.c2;
  e.c1 = star.c1 + 0.5 * a * star.c2;
  e.c0 = star.c0 + (a / kPi) * star.c1 + inv_area * star.c2;
  return e;
}

CurvatureDensities bias_correct(const CurvatureDensities& measured,
                                const GridSpec& grid) {
  grid.validate();
  const double a = grid.boundary_length() / grid.area();
  const double inv_area = 1.0 / grid.area();
  CurvatureDensities hat;
  hat.c2 = measured.c2;
  hat.c1 = measured.c1 - 0.5 * a * measured.c2;
  hat.c0 = measured.c0 - (a / kPi) * measured.c1 +
           (a * a / (2.0 * kPi) - inv_area) * measured.c2;
  return hat;
}

}  // namespace excur
