#include "sievelab/rng.hpp"

#include <cmath>

namespace sievelab {

double Rng::exponential(double rate) { return -std::log(uniform_open()) / rate; }

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Marsaglia polar method.
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * f;
    has_cached_normal_ = true;
    return u * f;
}

double Rng::gamma(double shape, double rate) {
    if (shape < 1.0) {
        // Boost the shape, then scale by U^{1/shape}.
        const double g = gamma(shape + 1.0, rate);
        return g * std::pow(uniform_open(), 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

double Rng::beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
}

std::uint64_t Rng::binomial(std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);
    const double np = static_cast<double>(n) * p;
    if (n <= 16) {
        std::uint64_t k = 0;
        for (std::uint64_t i = 0; i < n; ++i) k += (uniform() < p);
        return k;
    }
    if (np < 10.0) return binomial_inversion(n, p);
    return binomial_btrd(n, p);
}

// Counts successes by jumping between them with geometric gaps. Exact, O(np).
std::uint64_t Rng::binomial_inversion(std::uint64_t n, double p) {
    const double log_q = std::log1p(-p);
    std::uint64_t count = 0;
    double pos = 0.0;
    for (;;) {
        const double skip = std::floor(std::log(uniform_open()) / log_q);
        pos += skip + 1.0;
        if (pos > static_cast<double>(n)) return count;
        ++count;
    }
}

namespace {

// Stirling tail of log k!: lgamma(k+1) - [(k+1/2)ln(k+1) - (k+1) + ln(sqrt(2*pi))].
double stirling_tail(double k) {
    static const double half_log_two_pi = 0.5 * std::log(2.0 * 3.14159265358979323846);
    return std::lgamma(k + 1.0) - ((k + 0.5) * std::log(k + 1.0) - (k + 1.0) + half_log_two_pi);
}

}  // namespace

// Hormann's BTRD transformed-rejection sampler; requires p <= 1/2 and np >= 10.
// The final acceptance compares against the exact log pmf ratio, so the
// squeeze steps only short-circuit decisions they provably agree with.
std::uint64_t Rng::binomial_btrd(std::uint64_t n, double p) {
    const double nd = static_cast<double>(n);
    const double q = 1.0 - p;
    const double np = nd * p;
    const double npq = np * q;
    const double sq = std::sqrt(npq);

    const double m = std::floor((nd + 1.0) * p);
    const double r = p / q;
    const double nr = (nd + 1.0) * r;
    const double b = 1.15 + 2.53 * sq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = np + 0.5;
    const double alpha = (2.83 + 5.1 / b) * sq;
    const double vr = 0.92 - 4.2 / b;
    const double urvr = 0.86 * vr;

    for (;;) {
        double u;
        double v = uniform();
        if (v <= urvr) {
            u = v / vr - 0.43;
            const double us = 0.5 - std::fabs(u);
            return static_cast<std::uint64_t>(std::floor((2.0 * a / us + b) * u + c));
        }
        if (v >= vr) {
            u = uniform() - 0.5;
        } else {
            u = v / vr - 0.93;
            u = (u < 0.0 ? -0.5 : 0.5) - u;
            v = uniform() * vr;
        }
        const double us = 0.5 - std::fabs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + c);
        if (kd < 0.0 || kd > nd) continue;
        v = v * alpha / (a / (us * us) + b);
        const double km = std::fabs(kd - m);

        if (km <= 15.0) {
            // Evaluate f(k)/f(m) by the ratio recursion.
            double f = 1.0;
            if (m < kd) {
                for (double i = m + 1.0; i <= kd; i += 1.0) f *= nr / i - r;
            } else if (m > kd) {
                for (double i = kd + 1.0; i <= m; i += 1.0) v *= nr / i - r;
            }
            if (v <= f) return static_cast<std::uint64_t>(kd);
            continue;
        }

        v = std::log(v);
        const double rho =
            (km / npq) * (((km / 3.0 + 0.625) * km + 1.0 / 6.0) / npq + 0.5);
        const double t = -km * km / (2.0 * npq);
        if (v < t - rho) return static_cast<std::uint64_t>(kd);
        if (v > t + rho) continue;

        // Exact acceptance: log f(k) - log f(m) via lgamma.
        const double nm = nd - m + 1.0;
        const double nk = nd - kd + 1.0;
        const double h = (m + 0.5) * std::log((m + 1.0) / (r * nm)) + stirling_tail(m) +
                         stirling_tail(nd - m);
        const double rhs = h + (nd + 1.0) * std::log(nm / nk) +
                           (kd + 0.5) * std::log(nk * r / (kd + 1.0)) - stirling_tail(kd) -
                           stirling_tail(nd - kd);
        if (v <= rhs) return static_cast<std::uint64_t>(kd);
    }
}

}  // namespace sievelab
