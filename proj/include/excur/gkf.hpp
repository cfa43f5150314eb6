#pragma once

#include "excur/covariance.hpp"
#include "excur/grid.hpp"

namespace excur {

// standard normal density and upper tail
double normal_pdf(double x);
double gaussian_tail(double x);          // P(Z > x)
double gaussian_tail_d1(double x);       // first derivative in x
double gaussian_tail_d2(double x);
double gaussian_tail_d3(double x);
double gaussian_tail_d4(double x);

// Lipschitz-Killing curvature densities of the excursion set {f >= u},
// normalized per unit area: c2 = area fraction, c1 = half boundary length
// per area, c0 = Euler characteristic per area.
struct CurvatureDensities {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

// densities for the unperturbed Gaussian field
CurvatureDensities curvature_densities(const CovarianceModel& m, double u);

// densities for f = g + eps X with iid pixel noise X, expanded to second
// order in eps; eps2_m2 = eps^2 E[X^2]
CurvatureDensities perturbed_densities(const CovarianceModel& m, double u,
                                       double eps2_m2);

// expected per-area curvatures of the excursion set clipped to the grid
// rectangle, including boundary contributions
CurvatureDensities expected_normalized(const CurvatureDensities& star,
                                       const GridSpec& grid);

// invert the boundary contributions: maps measured per-area curvatures to
// unbiased estimates of the densities
CurvatureDensities bias_correct(const CurvatureDensities& measured,
                                const GridSpec& grid);

}  // namespace excur
