#pragma once

#include <Eigen/Core>

#include "sievelab/errors.hpp"

namespace sievelab {

// How the increments of a monotone grid function are interpreted by the
// Stieltjes convolution: kContinuous puts each cell's mass at the cell
// midpoint (plus an explicit atom at 0), kLattice puts every mass exactly on
// grid nodes. Lattice laws must have their atoms commensurable with the grid
// step, and then convolution degenerates to exact discrete convolution.
enum class MassModel { kContinuous, kLattice };

class GridFunction {
  public:
    GridFunction(double step, Eigen::ArrayXd values, MassModel mass);

    double step() const { return step_; }
    double t_max() const { return step_ * static_cast<double>(values_.size() - 1); }
    Eigen::Index size() const { return values_.size(); }
    double jump_at_zero() const { return values_(0); }
    const Eigen::ArrayXd& values() const { return values_; }
    MassModel mass_model() const { return mass_; }

    // Linear interpolation; 0 for t < 0, GridTooShort beyond t_max.
    double operator()(double t) const;

    // Mass of cell i (i >= 1), plus the node-0 atom at index 0.
    Eigen::ArrayXd increments() const;

    double max_slope() const;

  private:
    double step_;
    Eigen::ArrayXd values_;
    MassModel mass_;
};

// Nearest node of a lattice point; NonCommensurableGrid when x is not within
// tolerance of a node.
Eigen::Index snap_to_node(double x, double h);

}  // namespace sievelab
