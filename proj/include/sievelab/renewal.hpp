#pragma once

#include <string>
#include <vector>

#include "sievelab/grid_function.hpp"
#include "sievelab/laws.hpp"

namespace sievelab {

// U(t) = sum_{i>=0} P{S_i <= t}. Closed form 1 + rate*t for exponential xi,
// exact discrete renewal recursion for lattice xi, truncated sum of
// convolution powers of the xi distribution function otherwise (the next
// power is dropped once its mass on [0, t_max] falls below 1e-12). The
// method actually used is written to *method when given.
GridFunction build_U(const StepLaw& law, double h, double t_max,
                     std::string* method = nullptr);

// CDF grid of eta.
GridFunction build_G(const StepLaw& law, double h, double t_max);

// Lebesgue-Stieltjes convolution (F*K)(t) = int_{[0,t]} F(t-y) dK(y) on the
// shared grid. Continuous-continuous pairs use increments of K with midpoint
// evaluation of F (second order, symmetric in F and K); any lattice factor
// contributes its node masses exactly.
GridFunction convolve_stieltjes(const GridFunction& F, const GridFunction& K);

// V = U*G, the mean of the perturbed-walk counting process N(t).
GridFunction build_V(const GridFunction& U, const GridFunction& G);

// V_j = V_{j-1} * V; build_Vj(V, 1) returns V itself.
GridFunction build_Vj(const GridFunction& V, int j);

// Everything the statistics need for one law on one grid. V_0 is the
// constant function 1 on [0, t_max] (unit mass at the origin), matching the
// convention the variance recursion starts from.
class RenewalTables {
  public:
    static RenewalTables build(const StepLaw& law, double h, double t_max, int j_max);

    const StepLaw& law() const { return law_; }
    const MomentSet& moments() const { return moments_; }
    double h() const { return h_; }
    double t_max() const { return t_max_; }
    int j_max() const { return j_max_; }
    const std::string& u_method() const { return u_method_; }

    const GridFunction& U() const { return U_[0]; }
    const GridFunction& G() const { return G_[0]; }
    // Vj(0) is the constant-1 grid; Vj(1) = V.
    const GridFunction& Vj(int j) const;
    const GridFunction& V() const { return Vj(1); }

  private:
    RenewalTables() = default;
    StepLaw law_ = StepLaw::derived(WeightLaw::gem(1.0));
    MomentSet moments_;
    double h_ = 0.0, t_max_ = 0.0;
    int j_max_ = 0;
    std::string u_method_;
    std::vector<GridFunction> U_, G_;
    std::vector<GridFunction> powers_;  // powers_[j] = V_j, j = 0..j_max
};

struct Centering {
    double value = 0.0;
    double interp_error_bound = 0.0;
};

// E rho_j(n) = V_j(log n), interpolated on the grid.
Centering centering(double n_balls, int j, const RenewalTables& tables);

}  // namespace sievelab
