#include "sievelab/grid_function.hpp"

#include <cmath>

namespace sievelab {

GridFunction::GridFunction(double step, Eigen::ArrayXd values, MassModel mass)
    : step_(step), values_(std::move(values)), mass_(mass) {
    if (!(step_ > 0.0)) throw DomainError("grid step must be positive");
    if (values_.size() < 2) throw DomainError("grid needs at least two nodes");
    if (!values_.allFinite()) throw DomainError("grid values must be finite");
    // Monotone up to accumulated roundoff of the construction.
    const double tol = 1e-9 * (1.0 + std::fabs(values_(values_.size() - 1)));
    for (Eigen::Index i = 1; i < values_.size(); ++i)
        if (values_(i) < values_(i - 1) - tol)
            throw DomainError("grid values must be nondecreasing");
}

double GridFunction::operator()(double t) const {
    if (t < 0.0) return 0.0;
    const double pos = t / step_;
    const auto n = values_.size();
    if (pos > static_cast<double>(n - 1) + 1e-9)
        throw GridTooShort("evaluation beyond t_max");
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), n - 2);
    const double frac = pos - static_cast<double>(i);
    return values_(i) + frac * (values_(i + 1) - values_(i));
}

Eigen::ArrayXd GridFunction::increments() const {
    Eigen::ArrayXd d(values_.size());
    d(0) = values_(0);
    d.tail(values_.size() - 1) =
        values_.tail(values_.size() - 1) - values_.head(values_.size() - 1);
    return d;
}

double GridFunction::max_slope() const {
    const auto n = values_.size();
    return (values_.tail(n - 1) - values_.head(n - 1)).maxCoeff() / step_;
}

Eigen::Index snap_to_node(double x, double h) {
    const auto idx = static_cast<Eigen::Index>(std::llround(x / h));
    if (std::fabs(x - static_cast<double>(idx) * h) > 1e-9 * std::max(1.0, std::fabs(x)))
        throw NonCommensurableGrid("lattice point not commensurable with grid step");
    return idx;
}

}  // namespace sievelab
