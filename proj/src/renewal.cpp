#include "sievelab/renewal.hpp"

#include <cmath>
#include <optional>

namespace sievelab {

namespace {

Eigen::Index node_count(double h, double t_max) {
    const auto n = static_cast<Eigen::Index>(std::llround(t_max / h));
    if (n < 1) throw DomainError("t_max must cover at least one step");
    return n + 1;
}

GridFunction sample_cdf(const std::function<double(double)>& cdf, double h,
                        double t_max) {
    const auto n = node_count(h, t_max);
    Eigen::ArrayXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cdf(static_cast<double>(i) * h);
    return GridFunction(h, std::move(v), MassModel::kContinuous);
}

GridFunction lattice_cdf(const Atoms& atoms, double h, double t_max) {
    const auto n = node_count(h, t_max);
    Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(n);
    for (const auto& [x, p] : atoms) {
        const Eigen::Index idx = snap_to_node(x, h);
        if (idx < n) mass(idx) += p;
    }
    Eigen::ArrayXd v(n);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        acc += mass(i);
        v(i) = acc;
    }
    return GridFunction(h, std::move(v), MassModel::kLattice);
}

// rate when the law of xi is exponential (directly or as |log W| under GEM).
std::optional<double> exponential_xi_rate(const StepLaw& law) {
    if (law.is_derived()) {
        if (law.weight().kind() == WeightLaw::Kind::kGem) return law.weight().theta();
        return std::nullopt;
    }
    const Marginal& xi = law.xi_marginal();
    if (xi.kind() == Marginal::Kind::kExponential) return xi.rate();
    if (xi.kind() == Marginal::Kind::kGamma && xi.shape() == 1.0) return xi.rate();
    return std::nullopt;
}

}  // namespace

GridFunction build_U(const StepLaw& law, double h, double t_max, std::string* method) {
    if (law.xi_is_lattice()) {
        if (method) *method = "lattice-exact";
        const auto n = node_count(h, t_max);
        std::vector<std::pair<Eigen::Index, double>> pmf;
        for (const auto& [x, p] : law.xi_atoms()) {
            const Eigen::Index idx = snap_to_node(x, h);
            if (idx == 0) throw NonCommensurableGrid("xi atom at 0 is not allowed");
            pmf.emplace_back(idx, p);
        }
        Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(n);
        mass(0) = 1.0;
        for (Eigen::Index m = 1; m < n; ++m) {
            double s = 0.0;
            for (const auto& [idx, p] : pmf)
                if (m >= idx) s += p * mass(m - idx);
            mass(m) = s;
        }
        Eigen::ArrayXd v(n);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            acc += mass(i);
            v(i) = acc;
        }
        return GridFunction(h, std::move(v), MassModel::kLattice);
    }

    if (const auto rate = exponential_xi_rate(law)) {
        if (method) *method = "closed-form-exponential";
        const auto n = node_count(h, t_max);
        Eigen::ArrayXd v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = 1.0 + *rate * static_cast<double>(i) * h;
        return GridFunction(h, std::move(v), MassModel::kContinuous);
    }

    if (method) *method = "convolution-powers";
    const GridFunction F =
        sample_cdf([&law](double x) { return law.xi_cdf(x); }, h, t_max);
    const auto n = F.size();
    Eigen::ArrayXd acc = Eigen::ArrayXd::Ones(n);  // i = 0 term, 1{t >= 0}
    GridFunction term = F;
    constexpr double kMassFloor = 1e-12;
    constexpr int kMaxTerms = 4000;
    int terms = 0;
    while (term.values()(n - 1) > kMassFloor) {
        acc += term.values();
        term = convolve_stieltjes(term, F);
        if (++terms > kMaxTerms)
            throw OverflowRisk("convolution-power series for U did not decay");
    }
    return GridFunction(h, std::move(acc), MassModel::kContinuous);
}

GridFunction build_G(const StepLaw& law, double h, double t_max) {
    if (law.eta_is_lattice()) return lattice_cdf(law.eta_atoms(), h, t_max);
    return sample_cdf([&law](double x) { return law.eta_cdf(x); }, h, t_max);
}

GridFunction convolve_stieltjes(const GridFunction& F, const GridFunction& K) {
    const auto n = F.size();
    if (n != K.size()) throw GridMismatch("convolution operands differ in length");
    if (std::fabs(F.step() - K.step()) > 1e-12 * F.step())
        throw GridMismatch("convolution operands differ in step");
    const double h = F.step();

    const bool f_lat = F.mass_model() == MassModel::kLattice;
    const bool k_lat = K.mass_model() == MassModel::kLattice;

    if (f_lat || k_lat) {
        // Node masses of the lattice factor hit exact offsets of the other CDF.
        const GridFunction& L = f_lat ? F : K;
        const GridFunction& C = f_lat ? K : F;
        const Eigen::ArrayXd dL = L.increments();
        Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n);
        for (Eigen::Index a = 0; a < n; ++a) {
            if (dL(a) == 0.0) continue;
            out.tail(n - a) += dL(a) * C.values().head(n - a);
        }
        const MassModel mm =
            (f_lat && k_lat) ? MassModel::kLattice : MassModel::kContinuous;
        return GridFunction(h, std::move(out), mm);
    }

    // Midpoint scheme: out[i] = K(0) F[i] + sum_{b=1..i} dK[b] (F[i-b]+F[i-b+1])/2.
    const Eigen::ArrayXd dK = K.increments();
    Eigen::ArrayXd favg_rev(n - 1);
    for (Eigen::Index m = 0; m < n - 1; ++m)
        favg_rev(m) = 0.5 * (F.values()(n - 2 - m) + F.values()(n - 1 - m));
    const double jk = K.jump_at_zero();
    Eigen::ArrayXd out(n);
    out(0) = jk * F.values()(0);
    for (Eigen::Index i = 1; i < n; ++i) {
        const double dot = dK.segment(1, i).matrix().dot(favg_rev.segment(n - 1 - i, i).matrix());
        out(i) = jk * F.values()(i) + dot;
    }
    return GridFunction(h, std::move(out), MassModel::kContinuous);
}

GridFunction build_V(const GridFunction& U, const GridFunction& G) {
    return convolve_stieltjes(U, G);
}

GridFunction build_Vj(const GridFunction& V, int j) {
    if (j < 1) throw DomainError("convolution power needs j >= 1");
    GridFunction out = V;
    for (int k = 2; k <= j; ++k) out = convolve_stieltjes(out, V);
    return out;
}

RenewalTables RenewalTables::build(const StepLaw& law, double h, double t_max,
                                   int j_max) {
    if (j_max < 1) throw DomainError("j_max must be >= 1");
    // Refuse grids whose top value would lose all precision.
    const double log_top = static_cast<double>(j_max) * std::log(std::max(t_max, 2.0)) -
                           std::lgamma(static_cast<double>(j_max) + 1.0);
    if (log_top > 300.0 * std::log(10.0))
        throw OverflowRisk("t_max^j/j! exceeds the double range");

    RenewalTables t;
    t.law_ = law;
    t.moments_ = compute_moments(law);
    t.h_ = h;
    t.t_max_ = t_max;
    t.j_max_ = j_max;
    t.U_.push_back(build_U(law, h, t_max, &t.u_method_));
    t.G_.push_back(build_G(law, h, t_max));

    const auto n = t.U_[0].size();
    Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(n);
    t.powers_.emplace_back(h, std::move(ones), MassModel::kLattice);  // V_0
    t.powers_.push_back(build_V(t.U_[0], t.G_[0]));
    for (int j = 2; j <= j_max; ++j)
        t.powers_.push_back(convolve_stieltjes(t.powers_.back(), t.powers_[1]));
    return t;
}

const GridFunction& RenewalTables::Vj(int j) const {
    if (j < 0 || j > j_max_) throw DomainError("V_j outside built range");
    return powers_[static_cast<std::size_t>(j)];
}

Centering centering(double n_balls, int j, const RenewalTables& tables) {
    if (!(n_balls >= 1.0)) throw DomainError("centering needs n >= 1");
    const double t = std::log(n_balls);
    const GridFunction& vj = tables.Vj(j);
    if (t > vj.t_max() + 1e-9) throw GridTooShort("log n exceeds t_max");
    Centering c;
    c.value = vj(t);
    const auto i = std::min<Eigen::Index>(
        static_cast<Eigen::Index>(t / vj.step()), vj.size() - 2);
    const double slope = (vj.values()(i + 1) - vj.values()(i)) / vj.step();
    c.interp_error_bound = vj.step() * slope;
    return c;
}

}  // namespace sievelab
