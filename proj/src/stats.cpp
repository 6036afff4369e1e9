#include "sievelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sievelab/errors.hpp"

namespace sievelab {

Estimate mean_with_se(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("mean of empty sample");
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (const double x : xs) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

Estimate variance_with_se(std::span<const double> xs) {
    if (xs.size() < 2) return {0.0, 0.0};
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (const double x : xs) sum += x;
    const double mean = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (const double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    const double var = m2 * n / (n - 1.0);
    const double se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    return {var, se};
}

double median(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    const double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                     xs.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (xs[mid - 1] + hi);
}

namespace {

double sorted_quantile(const std::vector<double>& xs, double q) {
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= xs.size()) return xs.back();
    const double frac = pos - static_cast<double>(i);
    return xs[i] + frac * (xs[i + 1] - xs[i]);
}

}  // namespace

double iqr(std::vector<double> xs) {
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    return sorted_quantile(xs, 0.75) - sorted_quantile(xs, 0.25);
}

double normal_cdf(double x, double sd) {
    return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0)));
}

double ks_statistic_normal(std::vector<double> xs, double sd) {
    if (xs.empty()) throw DomainError("KS statistic of empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = normal_cdf(xs[i], sd);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(f - lo, hi - f));
    }
    return d;
}

double ks_p_value(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * lambda * lambda * k * k);
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& rows) {
    const auto n = rows.rows();
    if (n < 2) throw DomainError("covariance needs at least two replicates");
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    const Eigen::MatrixXd centered = rows.rowwise() - mean;
    return centered.transpose() * centered / static_cast<double>(n - 1);
}

}  // namespace sievelab
