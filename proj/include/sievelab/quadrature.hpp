#pragma once

#include <functional>

namespace sievelab {

// Integrates f over (0,1) by tanh-sinh (double-exponential) quadrature:
// the substitution x = (1 + tanh((pi/2) sinh(u)))/2 pushes both endpoints to
// infinity, so integrable endpoint singularities (log, power) converge at
// machine precision. Levels are doubled until the result moves by less than
// rel_tol or the level cap is hit.
double integrate_unit_interval(const std::function<double(double)>& f,
                               double rel_tol = 1e-12);

// Integrates f over (0, infinity) via the map x = t/(1-t) onto (0,1).
double integrate_half_line(const std::function<double(double)>& f,
                           double rel_tol = 1e-12);

}  // namespace sievelab
