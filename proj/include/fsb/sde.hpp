#pragma once

// Controlled SDE simulation in spectral coordinates. Per step the control is
// evaluated on the grid, projected onto the retained modes, and every mode is
// advanced independently:
//   EM:          X <- X + [-a X + sigma sqrt(lam) u] dt + sigma sqrt(lam dt) xi
//   exponential: exact semigroup e^{-a dt} with exact noise variance
// Mode noise is drawn directly per retained coordinate (the transform of
// white grid noise is white over modes), which keeps noise streams identical
// across evaluation resolutions. Everything needed to replay gradients
// through the recursion (noises, states, projected controls) is recorded.

#include <functional>

#include "fsb/control.hpp"
#include "fsb/ou_bridge.hpp"
#include "fsb/rng.hpp"
#include "fsb/trajectory.hpp"

namespace fsb {

enum class SchemeKind { EulerMaruyama, Exponential };

struct StepScheme {
    SchemeKind kind = SchemeKind::EulerMaruyama;
    int n_steps = 30;
    void check() const;
};

// per-mode update coefficients for one uniform step: x <- decay*x + ctrl*u + noise*xi
struct StepCoeffs {
    Eigen::VectorXd decay, ctrl, noise;
};
StepCoeffs step_coeffs(const OUBridgeParams& p, SchemeKind kind, double dt);

// quadrature projection of grid values onto the retained modes at an
// arbitrary evaluation grid (cosine systems; kernel systems need the
// training grid)
Eigen::VectorXd project_to_modes(const EigenSystem& eigs, const GridSpec& grid,
                                 const Eigen::VectorXd& values);

Trajectory simulate(const OUBridgeParams& p, const GridField& x0, const Control& control,
                    const StepScheme& scheme, const GridSpec& target_grid, RngStream& rng);
Trajectory simulate_spectral(const OUBridgeParams& p, const Eigen::VectorXd& x0_coeffs,
                             const Control& control, const StepScheme& scheme,
                             const GridSpec& target_grid, RngStream& rng);

struct ControlGradient {
    Eigen::VectorXd grad_theta;
    Eigen::VectorXd grad_x0;  // w.r.t. the spectral initial condition
};

// cotangent injected into the projected control at a given step (running
// costs); empty function means none
using RunningGradFn = std::function<Eigen::VectorXd(int step, const Eigen::VectorXd& state,
                                                    const Eigen::VectorXd& control_eval)>;

// Exact reverse accumulation through the stored discrete recursion
// (discretize-then-differentiate); noises are replayed as constants.
ControlGradient replay_gradient(const Trajectory& traj, const OUBridgeParams& p,
                                const Control& control, const Eigen::VectorXd& terminal_grad,
                                const RunningGradFn& running_grad = {});

}  // namespace fsb
