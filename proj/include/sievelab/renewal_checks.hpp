#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sievelab/renewal.hpp"

namespace sievelab {

// Outcome of one inequality verified on the grid. worst_slack is the
// most-violated margin (bound minus value) over the checked range; negative
// means violation beyond the recorded numerical tolerance.
struct BoundReport {
    std::string name;
    bool holds = false;
    double worst_slack = 0.0;
    double arg_worst = 0.0;
    double tolerance = 0.0;
    std::map<std::string, double> constants;
};

// int_(a,b] f(y) dK(y): cell masses at midpoints for continuous K, node
// masses for lattice K, the node-0 atom included when a < 0.
double stieltjes_integral(const GridFunction& K, double a, double b,
                          const std::function<double(double)>& f);

// Grid estimate of c0 = sup_t (U(t) - t/m).
double estimate_c0(const RenewalTables& tables);
// c = max(c0, E eta / m), the constant every later bound runs on.
double renewal_constant(const RenewalTables& tables, double c0);

// U(t) - t/m <= E xi^2 / m^2 at every node; the estimated c0 is recorded.
BoundReport check_lorden(const RenewalTables& tables);

// |V(t) - t/m| <= c, and 0 <= V(t) - m^{-1} int_0^t G <= c0.
std::vector<BoundReport> check_v_band(const RenewalTables& tables);

// |V_j(t) - t^j/(j! m^j)| <= sum_{i<j} C(j,i) c^{j-i} t^i/(i! m^i) per j.
std::vector<BoundReport> check_prop41(const RenewalTables& tables,
                                      const std::vector<int>& j_list, double c);

// On s >= 2 c m j^2: V_k(s) <= 2 s^k/(k! m^k) for k = 1..j plus the two
// algebraic comparison sums, all checked by direct evaluation.
std::vector<BoundReport> check_lemma42(const RenewalTables& tables, int j, double c);

// j^{1/2} (j-1)! m^j t^{-(j-1/2)} int_(Tt/j, t] y^{1/2} d_y(-V_{j-1}(t-y)).
std::vector<std::pair<double, double>> tail_truncation_diag(const RenewalTables& tables,
                                                            int j, double t,
                                                            const std::vector<double>& T_list);

struct DriReport {
    double r_constant = 0.0;   // U(1) * sum of per-unit-interval sups
    double sup_ratio = 0.0;    // sup over [t_lo, t_hi] of (f * V_j)(t) / V_{j-1}(t)
    BoundReport pointwise;     // int_[0,x] f(x-y) dV(y) <= r over sampled x
};

// f must be nonnegative with the given per-unit-interval sup envelope.
DriReport dri_convolution_bound(const std::function<double(double)>& f,
                                const std::vector<double>& envelope_sups,
                                const RenewalTables& tables, int j, double t_lo,
                                double t_hi);

struct ExpTailReport {
    std::vector<std::pair<double, double>> ratios;  // (t, tail / V_{j-1}(t))
    double sup_ratio = 0.0;
    double rho_constant = 0.0;  // E e^{-eta} / (1 - E e^{-xi})
};

// int_(t,inf) e^{t-y} dV_j(y) relative to V_{j-1}(t) along t_list.
ExpTailReport exp_tail_bound(const RenewalTables& tables, int j,
                             const std::vector<double>& t_list);

struct ExpansionFit {
    double gamma_hat = 0.0;           // tail average of V(t) - t/m
    double gamma_moments = 0.0;       // E xi^2/(2 m^2) - E eta/m
    std::optional<double> decay_rate; // LS slope of log|V - t/m - gamma_hat|
    bool noisy_tail = false;          // residual never exceeded the noise floor
    double noise_floor = 0.0;
    double max_abs_residual = 0.0;
};

// Requires an absolutely continuous xi component and exponential moments.
ExpansionFit expansion_fit(const RenewalTables& tables);

// (V_j(t) - t^j/(j! m^j)) / (gamma j t^{j-1}/((j-1)! m^{j-1})) along t_list;
// GammaNonpositive unless gamma > 0.
std::vector<std::pair<double, double>> prop71_ratio(const RenewalTables& tables, int j,
                                                    const std::vector<double>& t_list);

// V(x+y) - V(x) <= U(y) over all grid pairs.
BoundReport check_subadditivity(const RenewalTables& tables);

// The two normalized comparison sums whose vanishing drives the large-j
// asymptotics, evaluated at level j and scale t with constant a.
std::pair<double, double> comparison_sum_limits(const MomentSet& moments, double a,
                                                int j, double t);

}  // namespace sievelab
