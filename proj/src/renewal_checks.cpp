#include "sievelab/renewal_checks.hpp"

#include <cmath>

#include "sievelab/errors.hpp"

namespace sievelab {

namespace {

double factorial(int k) { return std::tgamma(static_cast<double>(k) + 1.0); }

double binom(int n, int k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i)
        c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return c;
}

// t^j / (j! m^j), safe at t = 0.
double leading_term(double t, int j, double mu) {
    if (t <= 0.0) return j == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(j) * (std::log(t) - std::log(mu)) -
                    std::lgamma(static_cast<double>(j) + 1.0));
}

// sum_{i=0}^{j-1} C(j,i) c^{j-i} t^i / (i! m^i)
double prop41_bound(double t, int j, double mu, double c) {
    double s = 0.0;
    for (int i = 0; i < j; ++i)
        s += binom(j, i) * std::pow(c, j - i) * leading_term(t, i, mu);
    return s;
}

double grid_tolerance(const GridFunction& g) {
    if (g.mass_model() == MassModel::kLattice)
        return 1e-9 * (1.0 + g.values()(g.size() - 1));
    return 10.0 * g.step() * g.max_slope();
}

struct Worst {
    double slack = std::numeric_limits<double>::infinity();
    double arg = 0.0;
    void update(double s, double where) {
        if (s < slack) {
            slack = s;
            arg = where;
        }
    }
};

}  // namespace

double stieltjes_integral(const GridFunction& K, double a, double b,
                          const std::function<double(double)>& f) {
    const Eigen::ArrayXd inc = K.increments();
    const double h = K.step();
    const bool lattice = K.mass_model() == MassModel::kLattice;
    double sum = 0.0;
    if (a < 0.0 && b >= 0.0 && inc(0) != 0.0) sum += inc(0) * f(0.0);
    for (Eigen::Index i = 1; i < inc.size(); ++i) {
        if (inc(i) == 0.0) continue;
        const double y = lattice ? static_cast<double>(i) * h
                                 : (static_cast<double>(i) - 0.5) * h;
        if (y > a && y <= b) sum += inc(i) * f(y);
    }
    return sum;
}

double estimate_c0(const RenewalTables& tables) {
    const GridFunction& U = tables.U();
    const double mu = tables.moments().mu;
    double c0 = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < U.size(); ++i) {
        const double t = static_cast<double>(i) * U.step();
        c0 = std::max(c0, U.values()(i) - t / mu);
    }
    return c0;
}

double renewal_constant(const RenewalTables& tables, double c0) {
    return std::max(c0, tables.moments().e_eta / tables.moments().mu);
}

BoundReport check_lorden(const RenewalTables& tables) {
    const GridFunction& U = tables.U();
    const MomentSet& m = tables.moments();
    const double classical = m.e_xi2 / (m.mu * m.mu);
    BoundReport rep;
    rep.name = "lorden";
    rep.tolerance = grid_tolerance(U);
    Worst w;
    for (Eigen::Index i = 0; i < U.size(); ++i) {
        const double t = static_cast<double>(i) * U.step();
        w.update(classical - (U.values()(i) - t / m.mu), t);
    }
    rep.worst_slack = w.slack;
    rep.arg_worst = w.arg;
    rep.holds = rep.worst_slack >= -rep.tolerance;
    rep.constants["c0_estimate"] = estimate_c0(tables);
    rep.constants["classical_bound"] = classical;
    return rep;
}

std::vector<BoundReport> check_v_band(const RenewalTables& tables) {
    const GridFunction& V = tables.V();
    const GridFunction& G = tables.G();
    const MomentSet& m = tables.moments();
    const double c0 = estimate_c0(tables);
    const double c = renewal_constant(tables, c0);
    const double h = V.step();

    BoundReport band;
    band.name = "v-band";
    band.tolerance = grid_tolerance(V);
    Worst wb;
    for (Eigen::Index i = 0; i < V.size(); ++i) {
        const double t = static_cast<double>(i) * h;
        wb.update(c - std::fabs(V.values()(i) - t / m.mu), t);
    }
    band.worst_slack = wb.slack;
    band.arg_worst = wb.arg;
    band.holds = band.worst_slack >= -band.tolerance;
    band.constants["c"] = c;
    band.constants["c0_estimate"] = c0;

    BoundReport integral;
    integral.name = "v-integral-band";
    integral.tolerance = grid_tolerance(V) + h * 2.0;  // trapezoid error at jumps
    Worst wi;
    double g_int = 0.0;
    for (Eigen::Index i = 0; i < V.size(); ++i) {
        const double t = static_cast<double>(i) * h;
        if (i > 0) g_int += 0.5 * h * (G.values()(i) + G.values()(i - 1));
        const double gap = V.values()(i) - g_int / m.mu;
        wi.update(std::min(gap, c0 - gap), t);
    }
    integral.worst_slack = wi.slack;
    integral.arg_worst = wi.arg;
    integral.holds = integral.worst_slack >= -integral.tolerance;
    integral.constants["c0_estimate"] = c0;
    return {band, integral};
}

std::vector<BoundReport> check_prop41(const RenewalTables& tables,
                                      const std::vector<int>& j_list, double c) {
    const MomentSet& m = tables.moments();
    std::vector<BoundReport> out;
    for (const int j : j_list) {
        const GridFunction& vj = tables.Vj(j);
        BoundReport rep;
        rep.name = "prop41 j=" + std::to_string(j);
        rep.tolerance = grid_tolerance(vj);
        Worst w;
        for (Eigen::Index i = 0; i < vj.size(); ++i) {
            const double t = static_cast<double>(i) * vj.step();
            const double lhs = std::fabs(vj.values()(i) - leading_term(t, j, m.mu));
            w.update(prop41_bound(t, j, m.mu, c) - lhs, t);
        }
        rep.worst_slack = w.slack;
        rep.arg_worst = w.arg;
        rep.holds = rep.worst_slack >= -rep.tolerance;
        rep.constants["c"] = c;
        out.push_back(rep);
    }
    return out;
}

std::vector<BoundReport> check_lemma42(const RenewalTables& tables, int j, double c) {
    const MomentSet& m = tables.moments();
    const double s_min = 2.0 * c * m.mu * static_cast<double>(j) * static_cast<double>(j);
    if (s_min > tables.t_max())
        throw RangeEmpty("2 c m j^2 exceeds t_max; no admissible s");

    std::vector<BoundReport> out;
    const double h = tables.V().step();
    const auto i_min = static_cast<Eigen::Index>(std::ceil(s_min / h));
    for (int k = 1; k <= j; ++k) {
        const GridFunction& vk = tables.Vj(k);
        BoundReport vb;
        vb.name = "lemma42.vk k=" + std::to_string(k);
        vb.tolerance = grid_tolerance(vk);
        Worst wv, w16, w17;
        for (Eigen::Index i = i_min; i < vk.size(); ++i) {
            const double s = static_cast<double>(i) * h;
            wv.update(2.0 * leading_term(s, k, m.mu) - vk.values()(i), s);

            double sum16 = 0.0, sum17 = 0.0;
            for (int q = 0; q < k; ++q) {
                const double base = binom(k, q) * std::pow(c, k - q);
                sum16 += base * leading_term(s, q, m.mu);
                sum17 += base * leading_term(s, q + 1, m.mu);
            }
            const double rhs16 =
                2.0 * c * static_cast<double>(k) * leading_term(s, k - 1, m.mu);
            const double rhs17 =
                2.0 * c * static_cast<double>(k) * leading_term(s, k, m.mu);
            w16.update(rhs16 - sum16, s);
            w17.update(rhs17 - sum17, s);
        }
        vb.worst_slack = wv.slack;
        vb.arg_worst = wv.arg;
        vb.holds = vb.worst_slack >= -vb.tolerance;
        vb.constants["c"] = c;
        out.push_back(vb);

        BoundReport a16;
        a16.name = "lemma42.sum16 k=" + std::to_string(k);
        a16.tolerance = 1e-9;
        a16.worst_slack = w16.slack;
        a16.arg_worst = w16.arg;
        a16.holds = a16.worst_slack >= -a16.tolerance;
        a16.constants["c"] = c;
        out.push_back(a16);

        BoundReport a17;
        a17.name = "lemma42.sum17 k=" + std::to_string(k);
        a17.tolerance = 1e-9;
        a17.worst_slack = w17.slack;
        a17.arg_worst = w17.arg;
        a17.holds = a17.worst_slack >= -a17.tolerance;
        a17.constants["c"] = c;
        out.push_back(a17);
    }
    return out;
}

std::vector<std::pair<double, double>> tail_truncation_diag(const RenewalTables& tables,
                                                            int j, double t,
                                                            const std::vector<double>& T_list) {
    const GridFunction& v_prev = tables.Vj(j - 1);
    if (t > v_prev.t_max() + 1e-9) throw GridTooShort("t exceeds the grid");
    const double h = v_prev.step();
    const auto it = static_cast<Eigen::Index>(std::llround(t / h));
    const MomentSet& m = tables.moments();
    const double norm = std::sqrt(static_cast<double>(j)) * factorial(j - 1) *
                        std::pow(m.mu, j) /
                        std::pow(t, static_cast<double>(j) - 0.5);

    std::vector<std::pair<double, double>> out;
    for (const double T : T_list) {
        const double lo = T * t / static_cast<double>(j);
        double sum = 0.0;
        if (lo < t) {
            for (Eigen::Index k = 1; k <= it; ++k) {
                const double y_mid = (static_cast<double>(k) - 0.5) * h;
                if (y_mid <= lo || y_mid > t) continue;
                const double mass = v_prev.values()(it - k + 1) - v_prev.values()(it - k);
                sum += std::sqrt(y_mid) * mass;
            }
        }
        out.emplace_back(T, norm * sum);
    }
    return out;
}

DriReport dri_convolution_bound(const std::function<double(double)>& f,
                                const std::vector<double>& envelope_sups,
                                const RenewalTables& tables, int j, double t_lo,
                                double t_hi) {
    double env = 0.0;
    for (const double s : envelope_sups) {
        if (!(s >= 0.0) || !std::isfinite(s))
            throw EnvelopeDiverges("envelope entries must be finite and nonnegative");
        env += s;
    }
    if (!envelope_sups.empty() && envelope_sups.back() > 1e-9 * (env + 1.0))
        throw EnvelopeDiverges("envelope sup-sums have not decayed; cannot certify");

    DriReport rep;
    rep.r_constant = tables.U()(1.0) * env;

    const GridFunction& V = tables.V();
    const auto n = V.size();
    const auto stride = std::max<Eigen::Index>(1, n / 512);
    BoundReport pw;
    pw.name = "dri-pointwise";
    pw.tolerance = grid_tolerance(V) * env;
    Worst w;
    for (Eigen::Index i = 0; i < n; i += stride) {
        const double x = static_cast<double>(i) * V.step();
        const double val =
            stieltjes_integral(V, -1.0, x, [&](double y) { return f(x - y); });
        w.update(rep.r_constant - val, x);
    }
    pw.worst_slack = w.slack;
    pw.arg_worst = w.arg;
    pw.holds = pw.worst_slack >= -pw.tolerance;
    pw.constants["r"] = rep.r_constant;
    rep.pointwise = pw;

    const GridFunction& vj = tables.Vj(j);
    const GridFunction& v_prev = tables.Vj(j - 1);
    double sup_ratio = 0.0;
    for (Eigen::Index i = 0; i < n; i += stride) {
        const double t = static_cast<double>(i) * V.step();
        if (t < t_lo || t > t_hi) continue;
        const double conv =
            stieltjes_integral(vj, -1.0, t, [&](double y) { return f(t - y); });
        sup_ratio = std::max(sup_ratio, conv / v_prev(t));
    }
    rep.sup_ratio = sup_ratio;
    return rep;
}

ExpTailReport exp_tail_bound(const RenewalTables& tables, int j,
                             const std::vector<double>& t_list) {
    const GridFunction& vj = tables.Vj(j);
    const GridFunction& v_prev = tables.Vj(j - 1);
    ExpTailReport rep;
    rep.rho_constant =
        tables.law().laplace_eta(1.0) / (1.0 - tables.law().laplace_xi(1.0));
    for (const double t : t_list) {
        if (std::exp(t - vj.t_max()) > 1e-12)
            throw GridTooShort("grid tail too short for the exponential integral");
        const double tail = stieltjes_integral(
            vj, t, vj.t_max(), [t](double y) { return std::exp(t - y); });
        const double ratio = tail / v_prev(t);
        rep.ratios.emplace_back(t, ratio);
        rep.sup_ratio = std::max(rep.sup_ratio, ratio);
    }
    return rep;
}

ExpansionFit expansion_fit(const RenewalTables& tables) {
    if (!tables.law().has_ac_component())
        throw HypothesisUnmet("expansion fit needs an absolutely continuous xi");
    if (!tables.law().has_exponential_moments())
        throw HypothesisUnmet("expansion fit needs exponential moments");

    const GridFunction& V = tables.V();
    const MomentSet& m = tables.moments();
    const auto n = V.size();
    const auto q0 = 3 * n / 4;

    ExpansionFit fit;
    fit.gamma_moments = m.gamma;
    double acc = 0.0;
    for (Eigen::Index i = q0; i < n; ++i)
        acc += V.values()(i) - static_cast<double>(i) * V.step() / m.mu;
    fit.gamma_hat = acc / static_cast<double>(n - q0);

    double rms_tail = 0.0;
    for (Eigen::Index i = q0; i < n; ++i) {
        const double r =
            V.values()(i) - static_cast<double>(i) * V.step() / m.mu - fit.gamma_hat;
        rms_tail += r * r;
    }
    rms_tail = std::sqrt(rms_tail / static_cast<double>(n - q0));
    fit.noise_floor = std::max(1e-10, 5.0 * rms_tail);

    // Least squares of log|residual| on t over the window above the floor.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double t = static_cast<double>(i) * V.step();
        const double r = V.values()(i) - t / m.mu - fit.gamma_hat;
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::fabs(r));
        if (std::fabs(r) <= fit.noise_floor) continue;
        const double y = std::log(std::fabs(r));
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++count;
    }
    if (count < 10) {
        fit.noisy_tail = true;
        return fit;
    }
    const double cn = static_cast<double>(count);
    fit.decay_rate = (cn * sxy - sx * sy) / (cn * sxx - sx * sx);
    return fit;
}

std::vector<std::pair<double, double>> prop71_ratio(const RenewalTables& tables, int j,
                                                    const std::vector<double>& t_list) {
    const MomentSet& m = tables.moments();
    if (!(m.gamma > 0.0))
        throw GammaNonpositive("the first-order ratio needs gamma > 0");
    const GridFunction& vj = tables.Vj(j);
    std::vector<std::pair<double, double>> out;
    for (const double t : t_list) {
        const double denom =
            m.gamma * static_cast<double>(j) * leading_term(t, j - 1, m.mu);
        out.emplace_back(t, (vj(t) - leading_term(t, j, m.mu)) / denom);
    }
    return out;
}

BoundReport check_subadditivity(const RenewalTables& tables) {
    const GridFunction& V = tables.V();
    const GridFunction& U = tables.U();
    const auto n = V.size();
    BoundReport rep;
    rep.name = "subadditivity";
    rep.tolerance = 2.0 * V.step() * V.max_slope();
    Worst w;
    const auto& v = V.values();
    for (Eigen::Index s = 0; s < n; ++s) {
        const double bound = U.values()(s);
        const double worst_gap = (v.tail(n - s) - v.head(n - s)).maxCoeff();
        w.update(bound - worst_gap, static_cast<double>(s) * V.step());
    }
    rep.worst_slack = w.slack;
    rep.arg_worst = w.arg;
    rep.holds = rep.worst_slack >= -rep.tolerance;
    return rep;
}

std::pair<double, double> comparison_sum_limits(const MomentSet& moments, double a,
                                                int j, double t) {
    if (j < 2) throw DomainError("comparison sums need j >= 2");
    const double mu = moments.mu;
    const double prefactor = factorial(j - 1) * std::pow(mu, j - 1) /
                             (static_cast<double>(j) * std::pow(t, j - 1));
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i <= j - 2; ++i) {
        s1 += binom(j, i) * std::pow(a, j - i) * leading_term(t, i, mu);
        s2 += binom(j - 2, i) * std::pow(a, j - 2 - i) * leading_term(t, i, mu);
    }
    return {prefactor * s1, prefactor * static_cast<double>(j - 1) * s2};
}

}  // namespace sievelab
