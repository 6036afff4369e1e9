#include "sievelab/brw.hpp"

#include <cmath>

#include "sievelab/errors.hpp"
#include "sievelab/parallel.hpp"
#include "sievelab/stats.hpp"

namespace sievelab {

void Budget::charge(std::uint64_t k) {
    used += k;
    if (used > cap) throw BudgetExceeded("branching simulation exceeded the individual cap");
}

PrwRealization sample_prw(const StepLaw& law, double t, Rng& rng, std::size_t point_cap) {
    if (t < 0.0) throw DomainError("horizon must be nonnegative");
    PrwRealization out;
    out.horizon = t;
    double s = 0.0;
    for (;;) {
        const auto [xi, eta] = law.sample(rng);
        const double point = s + eta;
        if (point <= t) {
            out.points.push_back({s, point});
            if (out.points.size() > point_cap)
                throw PathExplosion("perturbed walk produced too many points");
        }
        s += xi;
        if (s > t) {
            out.walk_tail = s;
            return out;
        }
    }
}

namespace {

// Counts level-j descendants with positions <= t_hi (and <= t_lo when
// lo_count is given). base is the position of the subtree root.
std::uint64_t brw_count(const StepLaw& law, int j, double t_lo, double t_hi, Rng& rng,
                        Budget& budget, std::uint64_t* lo_count,
                        std::vector<std::pair<double, std::uint64_t>>* first_gen) {
    const PrwRealization walk = sample_prw(law, t_hi, rng);
    budget.charge(walk.count());
    if (j == 1) {
        if (lo_count)
            for (const auto& p : walk.points) *lo_count += (p.t <= t_lo);
        if (first_gen)
            for (const auto& p : walk.points) first_gen->push_back({p.t, 1});
        return walk.count();
    }
    std::uint64_t total = 0;
    for (const auto& p : walk.points) {
        std::uint64_t sub_lo = 0;
        const std::uint64_t sub = brw_count(law, j - 1, t_lo - p.t, t_hi - p.t, rng,
                                            budget, lo_count ? &sub_lo : nullptr, nullptr);
        if (lo_count) *lo_count += sub_lo;
        if (first_gen) first_gen->push_back({p.t, sub});
        total += sub;
    }
    return total;
}

}  // namespace

BrwSample simulate_brw(const StepLaw& law, int j, double t, Rng& rng, Budget& budget,
                       bool keep_first_generation) {
    if (j < 1) throw DomainError("generation must be >= 1");
    if (t < 0.0) throw DomainError("horizon must be nonnegative");
    BrwSample out;
    out.level = j;
    out.horizon = t;
    out.value = brw_count(law, j, t, t, rng, budget, nullptr,
                          keep_first_generation ? &out.first_generation : nullptr);
    return out;
}

std::pair<std::uint64_t, std::uint64_t> simulate_brw_two_horizons(
    const StepLaw& law, int j, double t_lo, double t_hi, Rng& rng, Budget& budget) {
    if (t_lo > t_hi) throw DomainError("horizons must be nested");
    std::uint64_t lo = 0;
    const std::uint64_t hi = brw_count(law, j, t_lo, t_hi, rng, budget, &lo, nullptr);
    return {lo, hi};
}

double theorem31_statistic(const StepLaw& law, double j, double t, double u, Rng& rng,
                           const RenewalTables& tables, Budget& budget) {
    const int k = static_cast<int>(std::floor(j * u));
    if (k < 1) throw DomainError("floor(j u) must be >= 1");
    if (t > tables.t_max() + 1e-9) throw GridTooShort("horizon exceeds the grid");
    if (k > tables.j_max()) throw DomainError("tables lack V_j for floor(ju)");

    BrwSample sample = simulate_brw(law, k, t, rng, budget, /*keep_first_generation=*/true);
    const GridFunction& v_prev = tables.Vj(k - 1);
    double centering_sum = 0.0;
    for (const auto& [pos, cnt] : sample.first_generation) {
        (void)cnt;
        centering_sum += v_prev(t - pos);
    }
    const double m = tables.moments().mu;
    const double scale =
        std::pow(m, -k) * std::pow(t, static_cast<double>(k) - 0.5);
    const double factor =
        std::sqrt(std::floor(j)) * std::tgamma(static_cast<double>(k));
    return factor * (static_cast<double>(sample.value) - centering_sum) / scale;
}

namespace {

// One evaluation of the recursive unbiased estimator of D_k(s).
double d_hat(const StepLaw& law, int k, double s, const RenewalTables& tables, Rng& rng) {
    if (s < 0.0) return 0.0;
    const PrwRealization walk = sample_prw(law, s, rng);
    const GridFunction& v_prev = tables.Vj(k - 1);
    double m_sum = 0.0;
    for (const auto& p : walk.points) m_sum += v_prev(s - p.t);
    const double vk = tables.Vj(k)(s);
    const double i_part = (m_sum - vk) * (m_sum - vk);
    if (k == 1 || walk.points.empty()) return i_part;
    const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(walk.count()));
    const double t_q = walk.points[std::min(pick, walk.count() - 1)].t;
    return static_cast<double>(walk.count()) * d_hat(law, k - 1, s - t_q, tables, rng) +
           i_part;
}

}  // namespace

double y2_square_estimate(const StepLaw& law, int j, double t,
                          const RenewalTables& tables, Rng& rng) {
    if (j < 2) throw DomainError("the Y2 square is identically 0 below level 2");
    if (t > tables.t_max() + 1e-9) throw GridTooShort("horizon exceeds the grid");
    const PrwRealization walk = sample_prw(law, t, rng);
    if (walk.points.empty()) return 0.0;
    const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(walk.count()));
    const double t_q = walk.points[std::min(pick, walk.count() - 1)].t;
    return static_cast<double>(walk.count()) * d_hat(law, j - 1, t - t_q, tables, rng);
}

VarianceRecursionReport variance_recursion_check(const StepLaw& law, int j, double t,
                                                 const RenewalTables& tables,
                                                 std::size_t replicates,
                                                 std::uint64_t seed, unsigned threads) {
    if (j < 2) throw DomainError("the recursion starts at j = 2");
    const GridFunction& v_prev = tables.Vj(j - 1);

    std::vector<double> njs(replicates);
    std::vector<double> q_terms(replicates);
    std::vector<double> m_sums(replicates);

    parallel_for(replicates, threads, [&](std::size_t i) {
        {
            Rng rng = replicate_stream(derive_key(seed, 0xD1), i);
            Budget budget;
            njs[i] = static_cast<double>(simulate_brw(law, j, t, rng, budget).value);
        }
        {
            Rng rng = replicate_stream(derive_key(seed, 0xD2), i);
            Budget budget;
            BrwSample s = simulate_brw(law, j, t, rng, budget, /*keep_first_generation=*/true);
            double q = 0.0, m = 0.0;
            for (const auto& [pos, cnt] : s.first_generation) {
                const double v = v_prev(t - pos);
                const double d = static_cast<double>(cnt) - v;
                q += d * d;
                m += v;
            }
            q_terms[i] = q;
            m_sums[i] = m;
        }
    });

    VarianceRecursionReport rep;
    rep.replicates = replicates;
    const auto var_lhs = variance_with_se(njs);
    rep.lhs = var_lhs.value;
    const auto conv = mean_with_se(q_terms);
    rep.conv_term = conv.value;
    const auto var_m = variance_with_se(m_sums);
    rep.i_term = var_m.value;
    rep.rhs = rep.conv_term + rep.i_term;
    const double se = std::sqrt(var_lhs.se * var_lhs.se + conv.se * conv.se +
                                var_m.se * var_m.se);
    rep.z = se > 0.0 ? (rep.lhs - rep.rhs) / se : 0.0;
    return rep;
}

}  // namespace sievelab
