#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "fsb/eigensystem.hpp"

namespace fsb {

// Time-indexed spectral states plus the standard-normal draws that produced
// them, so gradients can be replayed through the exact discrete recursion.
struct Trajectory {
    std::vector<double> times;                   // increasing, in [0, T]
    std::vector<Eigen::VectorXd> states;         // spectral coefficients per time
    std::vector<Eigen::VectorXd> noises;         // one per step (times.size() - 1)
    std::vector<Eigen::VectorXd> control_evals;  // optional cached spectral controls
    EigenSystemPtr eigs;
    GridSpec eval_grid;    // grid the control was evaluated on
    int scheme_kind = 0;   // SchemeKind that produced the recursion

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
    void check() const;
};

// CSV export; spectral rows (t, mode_index, coeff) or grid rows
// (t, grid_index, value) after synthesis on the construction grid.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, bool grid_values);

}  // namespace fsb
