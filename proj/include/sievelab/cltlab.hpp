#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "sievelab/laws.hpp"
#include "sievelab/occupancy.hpp"
#include "sievelab/renewal.hpp"

namespace sievelab {

// Level rule: either a fixed j or j = (log n)^alpha resp. t^alpha with
// alpha < 1/2 (the regime every limit theorem here lives in).
struct JRule {
    enum class Kind { kFixed, kPower };
    Kind kind = Kind::kFixed;
    double value = 1.0;

    static JRule fixed(double j);
    static JRule power(double alpha);
    double level(double scale) const;  // scale = log n or t

    nlohmann::json to_json() const;
    static JRule from_json(const nlohmann::json& j);
};

double limit_covariance(double u, double v);

// One joint sample of (int_0^inf e^{-u y} dB(y))_{u in u_list} from a single
// discretized Brownian path shared across the u's.
Eigen::VectorXd sample_limit_vector(const std::vector<double>& u_list, Rng& rng,
                                    double step, double horizon);

struct CltPerU {
    double u = 0.0;
    int level = 0;  // floor(j u)
    double mean = 0.0, mean_se = 0.0;
    double variance = 0.0, variance_se = 0.0;
    double ks_d = 0.0, ks_p = 0.0;  // against N(0, 1/(2u))
};

struct CltReport {
    double scale_param = 0.0;  // t or log n
    double j = 0.0;
    std::size_t replicates = 0;
    std::vector<CltPerU> per_u;
    Eigen::MatrixXd empirical_cov;
    Eigen::MatrixXd limit_cov;
    Eigen::MatrixXd replicate_stats;  // replicates x u, for CSV dumps

    nlohmann::json to_json() const;
};

struct Theorem32Plan {
    StepLaw law = StepLaw::derived(WeightLaw::gem(1.0));
    double t = 0.0;
    double j = 1.0;
    std::vector<double> u_list;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// Per replicate only a level-1 perturbed walk is simulated; the statistic
// normalizes sum_r V_{k-1}(t - T_r) - V_k(t) at k = floor(j u).
CltReport run_theorem32(const Theorem32Plan& plan, const RenewalTables& tables);

struct Theorem21Plan {
    WeightLaw law = WeightLaw::gem(1.0);
    double n = 0.0;  // ball count (real-valued; floor used for simulation)
    JRule j_rule;
    std::vector<double> u_list;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// Full occupancy CLT: per replicate one cascade, statistic per u from
// K_n(floor(j_n u)) centered at V_{floor(j_n u)}(log n).
CltReport run_theorem21(const Theorem21Plan& plan, const RenewalTables& tables);

struct WllnPlan {
    WeightLaw law = WeightLaw::gem(1.0);
    std::vector<double> n_list;
    JRule j_rule;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct WllnRow {
    double n = 0.0;
    int j = 0;
    double median_ratio = 0.0;
    double median_abs_dev = 0.0;  // median |ratio - 1|
    double iqr = 0.0;             // NaN for a single replicate
};

// ratio = j! mu^j K_n(j) / (log n)^j per replicate; medians/IQR per n.
std::vector<WllnRow> run_wlln(const WllnPlan& plan);

struct VanishingPlan {
    StepLaw law = StepLaw::derived(WeightLaw::gem(1.0));
    std::vector<double> scale_list;  // t values (Y2) or n values (Y1)
    JRule j_rule;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct VanishingRow {
    double scale = 0.0;  // t or n
    int j = 0;
    double mean_stat_sq = 0.0;
    double se = 0.0;
};

// Normalized second moment of the branching-side gap
// N_j(t) - sum_r V_{j-1}(t-T_r), estimated by the size-biased recursion so
// horizons far beyond direct simulation stay reachable.
std::vector<VanishingRow> run_vanishing_y2(const VanishingPlan& plan,
                                           const RenewalTables& tables);

// Normalized second moment of K_n(j) - rho_j(n) on coupled cascades.
std::vector<VanishingRow> run_vanishing_y1(const VanishingPlan& plan);

struct GapBounds {
    double tail_term = 0.0;   // n int_(n,inf) x^{-1} dE rho_j(x)
    double sieve_term = 0.0;  // int_[1,n] e^{-n/x} dE rho_j(x)
    double tail_ratio = 0.0;  // tail_term / V_{j-1}(log n)
    double sieve_ratio = 0.0;
};

GapBounds gap_bound_eval(double n, int j, const RenewalTables& tables);

// Empirical limit constant of t^{-1/2} E|N(t) - V(t)| together with the two
// candidate closed forms sqrt(2/pi) s^2 m^-3 and sqrt(2/pi) s m^-3/2 (they
// coincide for GEM(1); the general-law disagreement is reported, not
// resolved here).
struct MeanAbsDeviation {
    double empirical = 0.0;
    double se = 0.0;
    double candidate_quadratic = 0.0;
    double candidate_linear = 0.0;
};

MeanAbsDeviation mean_abs_deviation_constant(const StepLaw& law, double t,
                                             const RenewalTables& tables,
                                             std::size_t replicates, std::uint64_t seed,
                                             unsigned threads);

}  // namespace sievelab
