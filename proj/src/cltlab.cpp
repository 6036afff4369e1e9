#include "sievelab/cltlab.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "sievelab/brw.hpp"
#include "sievelab/errors.hpp"
#include "sievelab/parallel.hpp"
#include "sievelab/stats.hpp"

namespace sievelab {

namespace {

constexpr double kRootTwoOverPi = 0.79788456080286535588;  // E|B(1)|

void validate_u_list(const std::vector<double>& u_list) {
    for (std::size_t i = 0; i < u_list.size(); ++i) {
        if (!(u_list[i] > 0.0)) throw DomainError("u values must be positive");
        if (i > 0 && !(u_list[i] > u_list[i - 1]))
            throw DomainError("u_list must be sorted and distinct");
    }
}

int floor_level(double j, double u) {
    const int k = static_cast<int>(std::floor(j * u));
    if (k < 1) throw DomainError("floor(j u) must be >= 1");
    return k;
}

double factorial(int k) { return std::tgamma(static_cast<double>(k) + 1.0); }

// Aggregates per-replicate statistic rows into a CltReport.
CltReport summarize(Eigen::MatrixXd stats, const std::vector<double>& u_list,
                    const std::vector<int>& levels, double scale_param, double j) {
    CltReport rep;
    rep.scale_param = scale_param;
    rep.j = j;
    rep.replicates = static_cast<std::size_t>(stats.rows());
    const auto m = static_cast<Eigen::Index>(u_list.size());
    rep.limit_cov.resize(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            rep.limit_cov(a, b) = limit_covariance(u_list[static_cast<std::size_t>(a)],
                                                   u_list[static_cast<std::size_t>(b)]);
    rep.empirical_cov = covariance(stats);
    for (std::size_t k = 0; k < u_list.size(); ++k) {
        const auto col = stats.col(static_cast<Eigen::Index>(k));
        std::vector<double> xs(col.data(), col.data() + col.size());
        CltPerU pu;
        pu.u = u_list[k];
        pu.level = levels[k];
        const auto mean = mean_with_se(xs);
        pu.mean = mean.value;
        pu.mean_se = mean.se;
        const auto var = variance_with_se(xs);
        pu.variance = var.value;
        pu.variance_se = var.se;
        pu.ks_d = ks_statistic_normal(xs, std::sqrt(1.0 / (2.0 * u_list[k])));
        pu.ks_p = ks_p_value(pu.ks_d, xs.size());
        rep.per_u.push_back(pu);
    }
    rep.replicate_stats = std::move(stats);
    return rep;
}

}  // namespace

JRule JRule::fixed(double j) {
    if (!(j >= 1.0)) throw DomainError("fixed level must be >= 1");
    return {Kind::kFixed, j};
}

JRule JRule::power(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 0.5))
        throw DomainError("power rule needs 0 < alpha < 1/2");
    return {Kind::kPower, alpha};
}

double JRule::level(double scale) const {
    if (kind == Kind::kFixed) return value;
    return std::pow(scale, value);
}

nlohmann::json JRule::to_json() const {
    return {{"kind", kind == Kind::kFixed ? "fixed" : "power"}, {"value", value}};
}

JRule JRule::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "fixed") return fixed(j.at("value").get<double>());
    if (kind == "power") return power(j.at("value").get<double>());
    throw ConfigInvalid("unknown j_rule kind: " + kind);
}

double limit_covariance(double u, double v) {
    if (!(u > 0.0) || !(v > 0.0)) throw DomainError("covariance needs positive u, v");
    return 1.0 / (u + v);
}

Eigen::VectorXd sample_limit_vector(const std::vector<double>& u_list, Rng& rng,
                                    double step, double horizon) {
    if (!(step > 0.0)) throw DomainError("step must be positive");
    Eigen::VectorXd out(static_cast<Eigen::Index>(u_list.size()));
    if (u_list.empty()) return out;
    validate_u_list(u_list);
    if (horizon * u_list.front() < 20.0)
        throw HorizonTooShort("horizon * min(u) must reach 20");

    const auto steps = static_cast<std::size_t>(std::ceil(horizon / step));
    const auto m = static_cast<std::size_t>(u_list.size());
    // e^{-u y} at cell midpoints, advanced by a per-u decay factor.
    std::vector<double> kernel(m), decay(m), acc(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        kernel[k] = std::exp(-u_list[k] * 0.5 * step);
        decay[k] = std::exp(-u_list[k] * step);
    }
    const double root_step = std::sqrt(step);
    for (std::size_t i = 0; i < steps; ++i) {
        const double db = root_step * rng.normal();
        for (std::size_t k = 0; k < m; ++k) {
            acc[k] += kernel[k] * db;
            kernel[k] *= decay[k];
        }
    }
    for (std::size_t k = 0; k < m; ++k) out(static_cast<Eigen::Index>(k)) = acc[k];
    return out;
}

CltReport run_theorem32(const Theorem32Plan& plan, const RenewalTables& tables) {
    validate_u_list(plan.u_list);
    if (plan.u_list.empty()) throw DomainError("u_list must be nonempty");
    if (plan.replicates < 2) throw DomainError("need at least two replicates");
    const MomentSet& mom = tables.moments();
    if (!(mom.sigma2 > 0.0))
        throw HypothesisUnmet("the CLT needs Var(xi) in (0, inf)");
    if (plan.t > tables.t_max() + 1e-9) throw GridTooShort("t exceeds the grid");

    std::vector<int> levels;
    for (const double u : plan.u_list) {
        const int k = floor_level(plan.j, u);
        if (k > tables.j_max()) throw DomainError("tables lack V_j for floor(ju)");
        levels.push_back(k);
    }

    const double t = plan.t;
    std::vector<double> num_factor(levels.size()), denom(levels.size());
    std::vector<double> v_at_t(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) {
        num_factor[k] = std::sqrt(std::floor(plan.j)) * factorial(levels[k] - 1);
        denom[k] = std::sqrt(mom.sigma2 * std::pow(mom.mu, -2.0 * levels[k] - 1.0) *
                             std::pow(t, 2.0 * levels[k] - 1.0));
        v_at_t[k] = tables.Vj(levels[k])(t);
    }

    Eigen::MatrixXd stats(static_cast<Eigen::Index>(plan.replicates),
                          static_cast<Eigen::Index>(levels.size()));
    parallel_for(plan.replicates, plan.threads, [&](std::size_t i) {
        Rng rng = replicate_stream(plan.seed, i);
        const PrwRealization walk = sample_prw(tables.law(), t, rng);
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const GridFunction& v_prev = tables.Vj(levels[k] - 1);
            double sum = 0.0;
            for (const auto& p : walk.points) sum += v_prev(t - p.t);
            stats(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                num_factor[k] * (sum - v_at_t[k]) / denom[k];
        }
    });
    return summarize(std::move(stats), plan.u_list, levels, t, plan.j);
}

CltReport run_theorem21(const Theorem21Plan& plan, const RenewalTables& tables) {
    validate_u_list(plan.u_list);
    if (plan.u_list.empty()) throw DomainError("u_list must be nonempty");
    if (plan.replicates < 2) throw DomainError("need at least two replicates");
    if (!(plan.n >= 2.0)) throw DomainError("need n >= 2 balls");
    const MomentSet& mom = tables.moments();
    if (!(mom.sigma2 > 0.0))
        throw HypothesisUnmet("the CLT needs Var(log W) in (0, inf)");

    const double t = std::log(plan.n);
    if (t > tables.t_max() + 1e-9) throw GridTooShort("log n exceeds the grid");
    const double j = plan.j_rule.level(t);

    std::vector<int> levels;
    for (const double u : plan.u_list) {
        const int k = floor_level(j, u);
        if (k > tables.j_max()) throw DomainError("tables lack V_j for floor(ju)");
        levels.push_back(k);
    }
    const int deepest = *std::max_element(levels.begin(), levels.end());

    std::vector<double> num_factor(levels.size()), denom(levels.size());
    std::vector<double> center(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) {
        num_factor[k] = std::sqrt(std::floor(j)) * factorial(levels[k] - 1);
        denom[k] = std::sqrt(mom.sigma2 * std::pow(mom.mu, -2.0 * levels[k] - 1.0) *
                             std::pow(t, 2.0 * levels[k] - 1.0));
        center[k] = tables.Vj(levels[k])(t);
    }

    const auto n_balls = static_cast<std::uint64_t>(std::llround(plan.n));
    Eigen::MatrixXd stats(static_cast<Eigen::Index>(plan.replicates),
                          static_cast<Eigen::Index>(levels.size()));
    parallel_for(plan.replicates, plan.threads, [&](std::size_t i) {
        SchemeConfig cfg{n_balls, deepest, plan.law, derive_key(plan.seed, i)};
        const OccupancyProfile prof = simulate_occupancy(cfg);
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const auto occupied =
                static_cast<double>(prof.counts[static_cast<std::size_t>(levels[k]) - 1]);
            stats(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                num_factor[k] * (occupied - center[k]) / denom[k];
        }
    });
    return summarize(std::move(stats), plan.u_list, levels, t, j);
}

std::vector<WllnRow> run_wlln(const WllnPlan& plan) {
    if (plan.n_list.empty()) throw DomainError("n_list must be nonempty");
    if (!std::is_sorted(plan.n_list.begin(), plan.n_list.end()))
        throw DomainError("n_list must be increasing");
    const MomentSet mom = compute_moments(StepLaw::derived(plan.law));

    std::vector<WllnRow> rows;
    for (std::size_t idx = 0; idx < plan.n_list.size(); ++idx) {
        const double n = plan.n_list[idx];
        const double t = std::log(n);
        const int j = static_cast<int>(std::floor(plan.j_rule.level(t)));
        if (j < 1) throw DomainError("WLLN level must be >= 1");
        const double norm = factorial(j) * std::pow(mom.mu, j) / std::pow(t, j);

        std::vector<double> ratios(plan.replicates);
        const auto n_balls = static_cast<std::uint64_t>(std::llround(n));
        parallel_for(plan.replicates, plan.threads, [&](std::size_t i) {
            SchemeConfig cfg{n_balls, j, plan.law,
                             derive_key(derive_key(plan.seed, idx), i)};
            const OccupancyProfile prof = simulate_occupancy(cfg);
            ratios[i] =
                norm * static_cast<double>(prof.counts[static_cast<std::size_t>(j) - 1]);
        });

        WllnRow row;
        row.n = n;
        row.j = j;
        row.median_ratio = median(ratios);
        std::vector<double> devs(ratios.size());
        for (std::size_t i = 0; i < ratios.size(); ++i) devs[i] = std::fabs(ratios[i] - 1.0);
        row.median_abs_dev = median(devs);
        row.iqr = iqr(ratios);
        rows.push_back(row);
    }
    return rows;
}

std::vector<VanishingRow> run_vanishing_y2(const VanishingPlan& plan,
                                           const RenewalTables& tables) {
    std::vector<VanishingRow> rows;
    for (std::size_t idx = 0; idx < plan.scale_list.size(); ++idx) {
        const double t = plan.scale_list[idx];
        const int j = static_cast<int>(std::floor(plan.j_rule.level(t)));
        if (j < 2) throw DomainError("Y2 needs level >= 2");
        if (j > tables.j_max()) throw DomainError("tables lack V_j");
        const MomentSet& mom = tables.moments();
        const double norm = std::floor(static_cast<double>(j)) *
                            std::pow(factorial(j - 1), 2.0) * std::pow(mom.mu, 2.0 * j) /
                            std::pow(t, 2.0 * j - 1.0);

        std::vector<double> sq(plan.replicates);
        parallel_for(plan.replicates, plan.threads, [&](std::size_t i) {
            Rng rng = replicate_stream(derive_key(plan.seed, idx), i);
            sq[i] = norm * y2_square_estimate(plan.law, j, t, tables, rng);
        });
        const auto m = mean_with_se(sq);
        rows.push_back({t, j, m.value, m.se});
    }
    return rows;
}

std::vector<VanishingRow> run_vanishing_y1(const VanishingPlan& plan) {
    if (!plan.law.is_derived())
        throw DomainError("the occupancy gap needs a stick-breaking law");
    const MomentSet mom = compute_moments(plan.law);
    std::vector<VanishingRow> rows;
    for (std::size_t idx = 0; idx < plan.scale_list.size(); ++idx) {
        const double n = plan.scale_list[idx];
        const double t = std::log(n);
        const int j = static_cast<int>(std::floor(plan.j_rule.level(t)));
        if (j < 1) throw DomainError("Y1 needs level >= 1");
        const double norm = static_cast<double>(j) * std::pow(factorial(j - 1), 2.0) *
                            std::pow(mom.mu, 2.0 * j) / std::pow(t, 2.0 * j - 1.0);

        std::vector<double> sq(plan.replicates);
        const auto n_balls = static_cast<std::uint64_t>(std::llround(n));
        parallel_for(plan.replicates, plan.threads, [&](std::size_t i) {
            SchemeConfig cfg{n_balls, j, plan.law.weight(),
                             derive_key(derive_key(plan.seed, idx), i)};
            const CascadeOutput res = run_cascade(cfg, t);
            const double y1 =
                static_cast<double>(res.occupancy.counts[static_cast<std::size_t>(j) - 1]) -
                static_cast<double>(res.rho->counts[static_cast<std::size_t>(j) - 1]);
            sq[i] = norm * y1 * y1;
        });
        const auto m = mean_with_se(sq);
        rows.push_back({n, j, m.value, m.se});
    }
    return rows;
}

GapBounds gap_bound_eval(double n, int j, const RenewalTables& tables) {
    if (!(n >= 1.0)) throw DomainError("gap bounds need n >= 1");
    const double t = std::log(n);
    const GridFunction& vj = tables.Vj(j);
    if (t > vj.t_max() + 1e-9) throw GridTooShort("log n exceeds the grid");
    if (std::exp(t - vj.t_max()) > 1e-12)
        throw GridTooShort("grid tail too short for the exponential integral");

    const Eigen::ArrayXd inc = vj.increments();
    const double h = vj.step();
    GapBounds g;
    // tail: int_(t, inf) e^{t-y} dV_j(y); sieve: int_[0,t] e^{-e^{t-y}} dV_j(y).
    const bool lattice = vj.mass_model() == MassModel::kLattice;
    for (Eigen::Index i = 0; i < inc.size(); ++i) {
        if (inc(i) == 0.0) continue;
        const double y = lattice ? static_cast<double>(i) * h
                                 : (static_cast<double>(i) - 0.5) * h;
        if (i == 0) {
            g.sieve_term += inc(0) * std::exp(-std::exp(t));
            continue;
        }
        if (y > t)
            g.tail_term += inc(i) * std::exp(t - y);
        else
            g.sieve_term += inc(i) * std::exp(-std::exp(t - y));
    }
    const double v_prev = tables.Vj(j - 1)(t);
    g.tail_ratio = g.tail_term / v_prev;
    g.sieve_ratio = g.sieve_term / v_prev;
    return g;
}

MeanAbsDeviation mean_abs_deviation_constant(const StepLaw& law, double t,
                                             const RenewalTables& tables,
                                             std::size_t replicates, std::uint64_t seed,
                                             unsigned threads) {
    const double v_t = tables.V()(t);
    std::vector<double> devs(replicates);
    parallel_for(replicates, threads, [&](std::size_t i) {
        Rng rng = replicate_stream(seed, i);
        devs[i] = std::fabs(static_cast<double>(sample_prw(law, t, rng).count()) - v_t) /
                  std::sqrt(t);
    });
    const auto m = mean_with_se(devs);
    const MomentSet& mom = tables.moments();
    MeanAbsDeviation out;
    out.empirical = m.value;
    out.se = m.se;
    out.candidate_quadratic =
        kRootTwoOverPi * mom.sigma2 * std::pow(mom.mu, -3.0);
    out.candidate_linear =
        kRootTwoOverPi * std::sqrt(mom.sigma2) * std::pow(mom.mu, -1.5);
    return out;
}

nlohmann::json CltReport::to_json() const {
    nlohmann::json j;
    j["scale_param"] = scale_param;
    j["j"] = this->j;
    j["replicates"] = replicates;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& p : per_u) {
        per.push_back({{"u", p.u},
                       {"level", p.level},
                       {"mean", p.mean},
                       {"mean_se", p.mean_se},
                       {"variance", p.variance},
                       {"variance_se", p.variance_se},
                       {"ks_d", p.ks_d},
                       {"ks_p", p.ks_p}});
    }
    j["per_u"] = per;
    auto matrix = [](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(row);
        }
        return rows;
    };
    j["empirical_cov"] = matrix(empirical_cov);
    j["limit_cov"] = matrix(limit_cov);
    return j;
}

}  // namespace sievelab
