#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sievelab/laws.hpp"
#include "sievelab/renewal.hpp"
#include "sievelab/rng.hpp"

namespace sievelab {

struct SchemeConfig {
    std::uint64_t n = 1;  // balls
    int j_max = 1;        // deepest simulated level
    WeightLaw law = WeightLaw::gem(1.0);
    std::uint64_t seed = 0;
};

struct OccupancyProfile {
    std::uint64_t n = 0;
    std::vector<std::uint64_t> counts;  // K_n(j), j = 1..j_max
    std::optional<int> height;          // tau_n, absent when it exceeds j_max
};

struct RhoProfile {
    double threshold_log = 0.0;         // boxes with |log P(u)| <= threshold_log
    std::vector<std::uint64_t> counts;  // rho_j, j = 1..j_max
};

struct BoxChild {
    std::uint64_t index = 0;  // child position r in the stick order
    std::uint64_t balls = 0;
    double stick = 0.0;  // W_r
};

// One exact allocation round: children of a box holding m balls, generated by
// the sequential rule k_r ~ Binomial(remaining, 1 - W_r). Conditional on the
// ball missing children 1..r-1 it hits child r with probability 1 - W_r, so
// the rule reproduces the multinomial allocation exactly in O(occupied).
std::vector<BoxChild> allocate_box(std::uint64_t m, const WeightLaw& law, Rng& rng);

OccupancyProfile simulate_occupancy(const SchemeConfig& cfg);

// rho_j(t) = #{|u| = j : P(u) >= 1/t} for j = 1..j_max, computed exactly by
// expanding only boxes above the threshold (weights only shrink along paths).
// Per-box streams are keyed by the box path, so this sees the same realized
// weights as simulate_occupancy for any shared box.
RhoProfile count_rho(const SchemeConfig& cfg, double t);

struct YDecomposition {
    std::uint64_t occupied = 0;  // K_n(j)
    std::uint64_t rho = 0;       // rho_j(n)
    double centering_sum = 0.0;  // sum_r V_{j-1}(log n - T_r) over T_r <= log n
    double vj_at_log_n = 0.0;
    double y1 = 0.0, y2 = 0.0, y3 = 0.0;
};

// Coupled K/rho/first-generation decomposition on one realized cascade:
// Y1 = K - rho, Y2 = rho - sum_r V_{j-1}(log n - T_r), Y3 = sum - V_j(log n).
// Y1 + Y2 + Y3 telescopes to K - V_j(log n) by construction.
YDecomposition decompose_Y(const SchemeConfig& cfg, int j, const RenewalTables& tables);

// Shared engine behind the three operations; exposed for the statistics
// runners that need several outputs from a single realization.
struct CascadeOutput {
    OccupancyProfile occupancy;
    std::optional<RhoProfile> rho;
    std::vector<double> first_level_positions;  // T_r <= threshold_log
    std::vector<std::uint64_t> level_ball_sums; // balls accounted per level
};

CascadeOutput run_cascade(const SchemeConfig& cfg, std::optional<double> threshold_log,
                          bool record_first_level = false);

}  // namespace sievelab
