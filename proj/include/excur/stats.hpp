#pragma once

#include <functional>
#include <vector>

namespace excur {

double sample_mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // unbiased, n-1

// linear-interpolation quantile on order statistics, q in [0,1]
double sample_quantile(std::vector<double> xs, double q);

// sup |F_n - F| against a reference CDF
double ks_statistic_one_sample(std::vector<double> sample,
                               const std::function<double(double)>& cdf);

// sup |F_n - G_m| between two empirical CDFs
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace excur
