#include "sievelab/acceptance.hpp"

#include <chrono>
#include <cstdarg>
#include <functional>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sievelab/brw.hpp"
#include "sievelab/cltlab.hpp"
#include "sievelab/io.hpp"
#include "sievelab/occupancy.hpp"
#include "sievelab/parallel.hpp"
#include "sievelab/renewal_checks.hpp"
#include "sievelab/stats.hpp"
#include "sievelab/version.hpp"

namespace sievelab {

namespace {

constexpr std::uint64_t kSeed = 0x5EEDC0DE2026ULL;

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// --- small-instance enumeration oracle (single-atom W = 1/2) ----------------
//
// Box probabilities at level l are products of l independent geometric sticks
// p_r = 2^{-r}, so the power sums sum_boxes p^m equal (2^m - 1)^{-l} and the
// exact occupancy distribution follows from set-partition inclusion-exclusion.

double power_sum(int level, int m) {
    return std::pow(1.0 / (std::pow(2.0, m) - 1.0), level);
}

void set_partitions(int n, std::vector<std::vector<std::vector<int>>>& out) {
    std::vector<std::vector<int>> current;
    std::function<void(int)> rec = [&](int elem) {
        if (elem == n) {
            out.push_back(current);
            return;
        }
        const std::size_t frozen = current.size();
        for (std::size_t b = 0; b < frozen; ++b) {
            current[b].push_back(elem);
            rec(elem + 1);
            current[b].pop_back();
        }
        current.push_back({elem});
        rec(elem + 1);
        current.pop_back();
    };
    rec(0);
}

// sum over distinct boxes of prod_i p_box^{a_i} by inclusion-exclusion over
// merges of the k blocks.
double distinct_box_sum(const std::vector<int>& sizes, int level) {
    const int k = static_cast<int>(sizes.size());
    std::vector<std::vector<std::vector<int>>> merges;
    set_partitions(k, merges);
    double total = 0.0;
    for (const auto& tau : merges) {
        double term = 1.0;
        for (const auto& block : tau) {
            int m = 0;
            for (const int b : block) m += sizes[static_cast<std::size_t>(b)];
            double sign_fact = 1.0;
            for (std::size_t q = 1; q < block.size(); ++q)
                sign_fact *= -static_cast<double>(q);
            term *= sign_fact * power_sum(level, m);
        }
        total += term;
    }
    return total;
}

// P(K_n(level) = k) for the deterministic-stick cascade.
std::vector<double> occupancy_pmf(int n, int level) {
    std::vector<std::vector<std::vector<int>>> parts;
    set_partitions(n, parts);
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
    for (const auto& pi : parts) {
        std::vector<int> sizes;
        for (const auto& block : pi) sizes.push_back(static_cast<int>(block.size()));
        pmf[pi.size()] += distinct_box_sum(sizes, level);
    }
    return pmf;
}

// --- criteria ----------------------------------------------------------------

struct Hold {
    bool ok = true;
    std::string why;
    void require(bool cond, const std::string& msg) {
        if (!cond) {
            ok = false;
            if (!why.empty()) why += "; ";
            why += msg;
        }
    }
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::filesystem::path& out_dir,
                                            unsigned threads) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<CriterionResult> results;

    const auto timed = [&](int id, const std::string& name, auto&& body) {
        const auto start = std::chrono::steady_clock::now();
        CriterionResult r;
        r.id = id;
        r.name = name;
        try {
            Hold h;
            body(h);
            r.pass = h.ok;
            r.details = h.ok ? "ok" : h.why;
        } catch (const std::exception& e) {
            r.pass = false;
            r.details = std::string("exception: ") + e.what();
        }
        r.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %2d: %s (%.1fs)%s%s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.seconds, r.pass ? "" : " -- ",
                    r.pass ? "" : r.details.c_str());
        std::fflush(stdout);
        results.push_back(r);
    };

    const StepLaw gem1 = StepLaw::derived(WeightLaw::gem(1.0));
    const StepLaw lattice11 =
        StepLaw::direct(Marginal::atoms({{1.0, 1.0}}), Marginal::atoms({{1.0, 1.0}}));
    const StepLaw exp14 =
        StepLaw::direct(Marginal::exponential(1.0), Marginal::exponential(4.0));

    // Shared grids: built once, reused across criteria.
    const RenewalTables tab50 = RenewalTables::build(gem1, 1e-3, 50.0, 8);
    const double c_gem = renewal_constant(tab50, estimate_c0(tab50));

    // 1. Closed-form renewal oracle. For GEM(1), (xi, eta) are Exp(1), so
    // U(t) = 1 + t and V(t) = E N(t) = t (the unit-rate Poisson renewal count
    // convolved with Exp(1); cross-checked by Monte Carlo elsewhere).
    timed(1, "closed-form renewal oracle U = 1 + t, V = t (GEM(1))", [&](Hold& h) {
        double u_err = 0.0, v_err = 0.0;
        const auto& U = tab50.U();
        const auto& V = tab50.V();
        for (Eigen::Index i = 0; i < U.size(); ++i) {
            const double t = static_cast<double>(i) * U.step();
            u_err = std::max(u_err, std::fabs(U.values()(i) - (1.0 + t)));
            v_err = std::max(v_err, std::fabs(V.values()(i) - t));
        }
        h.require(u_err <= 1e-4, fmt("max |U - (1+t)| = %.3g > 1e-4", u_err));
        h.require(v_err <= 1e-4, fmt("max |V - t| = %.3g > 1e-4", v_err));

        CsvWriter csv({"t", "U", "V"});
        const auto stride = std::max<Eigen::Index>(1, U.size() / 1000);
        for (Eigen::Index i = 0; i < U.size(); i += stride)
            csv.add_row(std::vector<double>{static_cast<double>(i) * U.step(),
                                            U.values()(i), V.values()(i)});
        atomic_write(out_dir / "criterion1_grids.csv", csv.content());
    });

    // 2. Proposition 4.1 inequality for j = 1..8, GEM(1) and the lattice law.
    timed(2, "convolution-power band holds for j = 1..8 (GEM(1) + lattice)", [&](Hold& h) {
        const std::vector<int> js{1, 2, 3, 4, 5, 6, 7, 8};
        for (const auto& rep : check_prop41(tab50, js, c_gem))
            h.require(rep.holds, fmt("GEM %s slack %.3g", rep.name.c_str(), rep.worst_slack));
        const RenewalTables lat = RenewalTables::build(lattice11, 0.05, 50.0, 8);
        const double c_lat = renewal_constant(lat, estimate_c0(lat));
        for (const auto& rep : check_prop41(lat, js, c_lat))
            h.require(rep.holds,
                      fmt("lattice %s slack %.3g", rep.name.c_str(), rep.worst_slack));
    });

    // 3. Second-order expansion: gamma and decay for Exp(1)/Exp(4); for
    // GEM(1) the expansion is exactly flat (V = t), so the check asserts a
    // zero constant and a residual at grid accuracy.
    timed(3, "expansion fit (gamma = 0.75, decay = -4; GEM(1) flat)", [&](Hold& h) {
        const RenewalTables tx = RenewalTables::build(exp14, 1e-3, 50.0, 3);
        const ExpansionFit fit = expansion_fit(tx);
        h.require(std::fabs(fit.gamma_hat - 0.75) <= 0.01,
                  fmt("gamma_hat = %.4f not within 0.75 +- 0.01", fit.gamma_hat));
        const auto ratios = prop71_ratio(tx, 2, {50.0});
        h.require(std::fabs(ratios[0].second - 1.0) <= 0.15,
                  fmt("first-order ratio %.4f not within 1 +- 0.15", ratios[0].second));
        const ExpansionFit flat = expansion_fit(tab50);
        h.require(std::fabs(flat.gamma_hat) <= 1e-4,
                  fmt("GEM gamma_hat = %.3g exceeds 1e-4", flat.gamma_hat));
        h.require(flat.max_abs_residual <= 1e-4,
                  fmt("GEM residual %.3g exceeds grid accuracy", flat.max_abs_residual));
    });

    // 4. Level-1 centering CLT at t = 200, j = 8, u in {0.5, 1}.
    timed(4, "centered-sum CLT: variance, correlation, KS", [&](Hold& h) {
        const RenewalTables t200 = RenewalTables::build(gem1, 2e-3, 200.0, 8);
        Theorem32Plan plan;
        plan.law = gem1;
        plan.t = 200.0;
        plan.j = 8.0;
        plan.u_list = {0.5, 1.0};
        plan.replicates = 10'000;
        plan.seed = derive_key(kSeed, 4);
        plan.threads = threads;
        const CltReport rep = run_theorem32(plan, t200);
        const auto& at_one = rep.per_u[1];
        h.require(std::fabs(at_one.variance - 0.5) <= 0.125,
                  fmt("variance %.4f not within 0.5 +- 0.125", at_one.variance));
        const double corr = rep.empirical_cov(0, 1) /
                            std::sqrt(rep.empirical_cov(0, 0) * rep.empirical_cov(1, 1));
        h.require(std::fabs(corr - 0.9428) <= 0.03,
                  fmt("correlation %.4f not within 0.9428 +- 0.03", corr));
        h.require(at_one.ks_p > 0.01, fmt("KS p = %.4f <= 0.01", at_one.ks_p));
        atomic_write(out_dir / "criterion4_report.json", rep.to_json().dump(2) + "\n");
    });

    // 5. Vanishing branching-side gap: normalized Y2 second moment decreasing
    // over t in {100, 200, 400} at j = floor(t^0.3).
    timed(5, "Y2 second moment decreasing over t = 100, 200, 400", [&](Hold& h) {
        const RenewalTables t400 = RenewalTables::build(gem1, 4e-3, 400.0, 6);
        VanishingPlan plan;
        plan.law = gem1;
        plan.scale_list = {100.0, 200.0, 400.0};
        plan.j_rule = JRule::power(0.3);
        plan.replicates = 1000;
        plan.seed = derive_key(kSeed, 5);
        plan.threads = threads;
        const auto rows = run_vanishing_y2(plan, t400);
        std::ostringstream os;
        for (const auto& r : rows)
            os << fmt("t=%g j=%d E[stat^2]=%.5f (se %.5f); ", r.scale, r.j, r.mean_stat_sq,
                      r.se);
        for (std::size_t i = 1; i < rows.size(); ++i)
            h.require(rows[i].mean_stat_sq < rows[i - 1].mean_stat_sq,
                      "not strictly decreasing: " + os.str());
        CsvWriter csv({"t", "j", "mean_stat_sq", "se"});
        for (const auto& r : rows)
            csv.add_row(std::vector<double>{r.scale, static_cast<double>(r.j),
                                            r.mean_stat_sq, r.se});
        atomic_write(out_dir / "criterion5_y2.csv", csv.content());
    });

    // 6. WLLN trend: median |ratio - 1| strictly decreasing, final < 0.4.
    timed(6, "WLLN ratio trend over n = e^8, e^14, e^20", [&](Hold& h) {
        WllnPlan plan;
        plan.law = WeightLaw::gem(1.0);
        plan.n_list = {std::exp(8.0), std::exp(14.0), std::exp(20.0)};
        plan.j_rule = JRule::power(0.4);
        plan.replicates = 200;
        plan.seed = derive_key(kSeed, 6);
        plan.threads = threads;
        const auto rows = run_wlln(plan);
        std::ostringstream os;
        for (const auto& r : rows)
            os << fmt("log n=%.0f j=%d median|ratio-1|=%.4f; ", std::log(r.n), r.j,
                      r.median_abs_dev);
        for (std::size_t i = 1; i < rows.size(); ++i)
            h.require(rows[i].median_abs_dev < rows[i - 1].median_abs_dev,
                      "not strictly decreasing: " + os.str());
        h.require(rows.back().median_abs_dev < 0.4,
                  fmt("final median |ratio-1| = %.4f >= 0.4", rows.back().median_abs_dev));
        CsvWriter csv({"n", "j", "median_ratio", "median_abs_dev", "iqr"});
        for (const auto& r : rows)
            csv.add_row(std::vector<double>{r.n, static_cast<double>(r.j), r.median_ratio,
                                            r.median_abs_dev, r.iqr});
        atomic_write(out_dir / "criterion6_wlln.csv", csv.content());
    });

    // 7. Occupancy CLT at desk scale: n = e^20, j = 3, u = 1.
    timed(7, "occupancy CLT mean/variance at n = e^20, j = 3", [&](Hold& h) {
        Theorem21Plan plan;
        plan.law = WeightLaw::gem(1.0);
        plan.n = std::exp(20.0);
        plan.j_rule = JRule::fixed(3.0);
        plan.u_list = {1.0};
        plan.replicates = 2000;
        plan.seed = derive_key(kSeed, 7);
        plan.threads = threads;
        const CltReport rep = run_theorem21(plan, tab50);
        const auto& at_one = rep.per_u[0];
        h.require(std::fabs(at_one.mean) <= 4.0 * at_one.mean_se,
                  fmt("mean %.4f outside 4 stderr (%.4f)", at_one.mean,
                      4.0 * at_one.mean_se));
        h.require(at_one.variance >= 0.3 && at_one.variance <= 0.8,
                  fmt("variance %.4f outside [0.3, 0.8]", at_one.variance));
        atomic_write(out_dir / "criterion7_report.json", rep.to_json().dump(2) + "\n");
    });

    // 8. Variance recursion identity at t = 8, j in {2, 3}.
    timed(8, "variance recursion z-scores at j = 2, 3", [&](Hold& h) {
        for (const int j : {2, 3}) {
            const auto rep = variance_recursion_check(
                gem1, j, 8.0, tab50, 100'000, derive_key(kSeed, 80 + j), threads);
            h.require(std::fabs(rep.z) < 4.0,
                      fmt("j=%d z=%.2f (lhs %.3f rhs %.3f)", j, rep.z, rep.lhs, rep.rhs));
        }
    });

    // 9. Gap bounds and subadditivity.
    timed(9, "gap-bound ratios <= 5 and subadditivity", [&](Hold& h) {
        const RenewalTables t60 = RenewalTables::build(gem1, 5e-3, 60.0, 3);
        for (const double lt : {10.0, 20.0, 30.0}) {
            const GapBounds g = gap_bound_eval(std::exp(lt), 3, t60);
            h.require(g.tail_ratio <= 5.0 && g.sieve_ratio <= 5.0,
                      fmt("log n=%g ratios %.3f / %.3f exceed 5", lt, g.tail_ratio,
                          g.sieve_ratio));
        }
        const BoundReport sub = check_subadditivity(t60);
        h.require(sub.holds, fmt("subadditivity slack %.3g", sub.worst_slack));
    });

    // 10. Exact small-instance oracles.
    timed(10, "small-instance enumeration + deterministic tree counts", [&](Hold& h) {
        const WeightLaw half = WeightLaw::atoms({{0.5, 1.0}});
        const std::size_t runs = 1'000'000;
        for (const int n : {2, 3, 4}) {
            for (const int level : {1, 2}) {
                const auto pmf = occupancy_pmf(n, level);
                std::vector<std::uint64_t> hits(static_cast<std::size_t>(n) + 1, 0);
                std::vector<std::uint64_t> counts(runs);
                parallel_for(runs, threads, [&](std::size_t i) {
                    SchemeConfig cfg{static_cast<std::uint64_t>(n), level, half,
                                     derive_key(derive_key(kSeed, 100 + n * 10 + level), i)};
                    counts[i] =
                        simulate_occupancy(cfg).counts[static_cast<std::size_t>(level) - 1];
                });
                for (const auto k : counts) hits[static_cast<std::size_t>(k)] += 1;
                for (int k = 1; k <= n; ++k) {
                    const double freq = static_cast<double>(hits[static_cast<std::size_t>(k)]) /
                                        static_cast<double>(runs);
                    const double se =
                        std::sqrt(std::max(freq * (1.0 - freq), 1e-12) /
                                  static_cast<double>(runs));
                    h.require(std::fabs(freq - pmf[static_cast<std::size_t>(k)]) <=
                                  3.0 * se + 3e-6,
                              fmt("n=%d level=%d k=%d freq %.5f vs exact %.5f", n, level, k,
                                  freq, pmf[static_cast<std::size_t>(k)]));
                }
            }
        }
        // Deterministic branching tree: N_j(t) = sum_{m <= t} C(m-1, j-1).
        for (int j = 1; j <= 3; ++j) {
            for (double t = 0.0; t <= 6.0; t += 0.5) {
                Rng rng(derive_key(kSeed, 200 + j));
                Budget budget;
                const auto sample = simulate_brw(lattice11, j, t, rng, budget);
                std::uint64_t want = 0;
                for (int m = j; m <= static_cast<int>(std::floor(t)); ++m) {
                    double cmb = 1.0;
                    for (int i = 0; i < j - 1; ++i)
                        cmb = cmb * static_cast<double>(m - 1 - i) / static_cast<double>(i + 1);
                    want += static_cast<std::uint64_t>(std::llround(cmb));
                }
                h.require(sample.value == want,
                          fmt("deterministic count j=%d t=%.1f got %llu want %llu", j, t,
                              static_cast<unsigned long long>(sample.value),
                              static_cast<unsigned long long>(want)));
            }
        }
    });

    // 11. Limit-law self-test: discretized Brownian integrals vs 1/(u+v).
    timed(11, "limit vector covariance within 0.01 of 1/(u+v)", [&](Hold& h) {
        const std::vector<double> us{0.5, 1.0, 2.0};
        const std::size_t paths = 100'000;
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(paths), 3);
        parallel_for(paths, threads, [&](std::size_t i) {
            Rng rng = replicate_stream(derive_key(kSeed, 11), i);
            rows.row(static_cast<Eigen::Index>(i)) =
                sample_limit_vector(us, rng, 1e-3, 40.0).transpose();
        });
        const Eigen::MatrixXd cov = covariance(rows);
        double worst = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                worst = std::max(worst, std::fabs(cov(a, b) -
                                                  limit_covariance(us[static_cast<std::size_t>(a)],
                                                                   us[static_cast<std::size_t>(b)])));
        h.require(worst < 0.01, fmt("max covariance deviation %.4f >= 0.01", worst));
    });

    // Rollup manifest.
    RunManifest manifest;
    manifest.tool_version = kVersion;
    manifest.subcommand = "acceptance";
    manifest.started_utc = utc_timestamp();
    manifest.master_seed = kSeed;
    manifest.finished_utc = utc_timestamp();
    nlohmann::json rollup = nlohmann::json::array();
    bool all = true;
    for (const auto& r : results) {
        rollup.push_back({{"id", r.id},
                          {"name", r.name},
                          {"pass", r.pass},
                          {"details", r.details},
                          {"seconds", r.seconds}});
        all &= r.pass;
    }
    manifest.pass = all;
    nlohmann::json doc = manifest.to_json();
    doc["criteria"] = rollup;
    atomic_write(out_dir / "acceptance.json", doc.dump(2) + "\n");
    return results;
}

}  // namespace sievelab
