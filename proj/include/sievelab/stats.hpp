#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sievelab {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

Estimate mean_with_se(std::span<const double> xs);
// Sample variance; the standard error comes from the fourth central moment.
Estimate variance_with_se(std::span<const double> xs);

double median(std::vector<double> xs);
// Interquartile range; NaN for fewer than two samples.
double iqr(std::vector<double> xs);

double normal_cdf(double x, double sd = 1.0);

// Two-sided one-sample Kolmogorov-Smirnov statistic against N(0, sd^2).
double ks_statistic_normal(std::vector<double> xs, double sd);
// Asymptotic p-value with the Stephens small-sample correction.
double ks_p_value(double d, std::size_t n);

// Empirical covariance of row-vectors (replicates x dims).
Eigen::MatrixXd covariance(const Eigen::MatrixXd& rows);

}  // namespace sievelab
