#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sievelab/laws.hpp"
#include "sievelab/renewal.hpp"
#include "sievelab/rng.hpp"

namespace sievelab {

struct PrwPoint {
    double s_prev = 0.0;  // S_{i-1}
    double t = 0.0;       // T_i = S_{i-1} + eta_i
};

// One perturbed-random-walk path truncated at the horizon. Generation stops
// at the first index with S_{i-1} > horizon: since eta > 0, no later point
// can land at or below the horizon.
struct PrwRealization {
    double horizon = 0.0;
    std::vector<PrwPoint> points;  // exactly the T_i <= horizon
    double walk_tail = 0.0;        // first S_i > horizon, kept for audit
    std::size_t count() const { return points.size(); }  // N(horizon)
};

PrwRealization sample_prw(const StepLaw& law, double t, Rng& rng,
                          std::size_t point_cap = 100'000'000);

// Running individual counter shared across one branching simulation.
struct Budget {
    std::uint64_t cap = 100'000'000;
    std::uint64_t used = 0;
    void charge(std::uint64_t k);
};

struct BrwSample {
    int level = 1;
    double horizon = 0.0;
    std::uint64_t value = 0;  // N_j(horizon)
    // (T_r, N^{(r)}_{j-1}(horizon - T_r)) per first-generation point, when kept.
    std::vector<std::pair<double, std::uint64_t>> first_generation;
};

// N_j(t) by the branching recursion over independent sub-realizations of the
// first generation; memory stays O(depth x points per level).
BrwSample simulate_brw(const StepLaw& law, int j, double t, Rng& rng, Budget& budget,
                       bool keep_first_generation = false);

// Same tree evaluated at two nested horizons t_lo <= t_hi (for monotonicity
// checks the horizons must share one realization).
std::pair<std::uint64_t, std::uint64_t> simulate_brw_two_horizons(
    const StepLaw& law, int j, double t_lo, double t_hi, Rng& rng, Budget& budget);

// floor(j)^{1/2} (floor(ju)-1)! (N_k(t) - sum_r V_{k-1}(t-T_r) 1{T_r<=t})
// / (m^{-k} t^{k-1/2}) with k = floor(ju), simulated and centered on one path.
double theorem31_statistic(const StepLaw& law, double j, double t, double u, Rng& rng,
                           const RenewalTables& tables, Budget& budget);

// Unbiased estimate of E (N_j(t) - sum_r V_{j-1}(t-T_r) 1{T_r<=t})^2
// = int_{[0,t]} D_{j-1}(t-y) dV(y), by the variance recursion
// D_k = int D_{k-1} dV + I_k with one size-biased walk point sampled per
// level. Cost is O(j t), so it reaches (j, t) far beyond direct simulation.
double y2_square_estimate(const StepLaw& law, int j, double t,
                          const RenewalTables& tables, Rng& rng);

struct VarianceRecursionReport {
    double lhs = 0.0;       // sample variance of N_j(t)
    double rhs = 0.0;       // convolution-term estimate + I_j estimate
    double conv_term = 0.0;
    double i_term = 0.0;
    double z = 0.0;
    std::size_t replicates = 0;
};

// Monte Carlo check of D_j(t) = int D_{j-1}(t-y) dV(y) + I_j(t): lhs and rhs
// come from independent replicate pools and the z-score measures their
// standardized difference.
VarianceRecursionReport variance_recursion_check(const StepLaw& law, int j, double t,
                                                 const RenewalTables& tables,
                                                 std::size_t replicates,
                                                 std::uint64_t seed, unsigned threads);

}  // namespace sievelab
