#include "fsb/sde.hpp"

#include <cmath>
#include <sstream>

#include "fsb/errors.hpp"
#include "fsb/kernels.hpp"
#include "fsb/linops.hpp"

namespace fsb {

void StepScheme::check() const {
    if (n_steps < 1) throw ConfigError("StepScheme: n_steps must be >= 1");
}

StepCoeffs step_coeffs(const OUBridgeParams& p, SchemeKind kind, double dt) {
    const int K = p.eigs->K;
    StepCoeffs c;
    c.decay.resize(K);
    c.ctrl.resize(K);
    c.noise.resize(K);
    for (int k = 0; k < K; ++k) {
        const double a = p.eigs->a[k];
        const double slam = p.sigma * std::sqrt(p.eigs->lam[k]);
        if (kind == SchemeKind::EulerMaruyama) {
            c.decay[k] = 1.0 - a * dt;
            c.ctrl[k] = slam * dt;
            c.noise[k] = slam * std::sqrt(dt);
        } else {
            c.decay[k] = std::exp(-a * dt);
            c.ctrl[k] = slam * (-std::expm1(-a * dt)) / a;
            c.noise[k] = std::sqrt(p.sigma * p.sigma * p.eigs->lam[k] *
                                   (-std::expm1(-2.0 * a * dt)) / (2.0 * a));
        }
    }
    return c;
}

Eigen::VectorXd project_to_modes(const EigenSystem& eigs, const GridSpec& grid,
                                 const Eigen::VectorXd& values) {
    const MatrixRM& E = eigs.eval_matrix(grid);
    Eigen::VectorXd coeffs(eigs.K);
    gemv(E, values.data(), coeffs.data());
    coeffs *= grid.cell_volume();
    return coeffs;
}

Trajectory simulate(const OUBridgeParams& p, const GridField& x0, const Control& control,
                    const StepScheme& scheme, const GridSpec& target_grid, RngStream& rng) {
    if (!(x0.grid == target_grid))
        throw ConfigError("simulate: initial condition must live on the target grid");
    return simulate_spectral(p, project_to_modes(*p.eigs, target_grid, x0.values), control,
                             scheme, target_grid, rng);
}

Trajectory simulate_spectral(const OUBridgeParams& p, const Eigen::VectorXd& x0_coeffs,
                             const Control& control, const StepScheme& scheme,
                             const GridSpec& target_grid, RngStream& rng) {
    p.check();
    scheme.check();
    const int K = p.eigs->K;
    if (x0_coeffs.size() != K) throw ConfigError("simulate: initial coefficient count mismatch");
    const int n = scheme.n_steps;
    const double dt = p.T / n;
    const StepCoeffs c = step_coeffs(p, scheme.kind, dt);
    const MatrixRM& E = p.eigs->eval_matrix(target_grid);
    const double h = target_grid.cell_volume();
    const auto& kn = kern::active();

    Trajectory traj;
    traj.eigs = p.eigs;
    traj.eval_grid = target_grid;
    traj.scheme_kind = static_cast<int>(scheme.kind);
    traj.times.resize(n + 1);
    for (int i = 0; i <= n; ++i) traj.times[i] = p.T * i / n;
    traj.states.reserve(n + 1);
    traj.noises.reserve(n);
    traj.control_evals.reserve(n);

    Eigen::VectorXd state = x0_coeffs;
    traj.states.push_back(state);
    GridField xg;
    xg.grid = target_grid;
    xg.values.resize(target_grid.num_points());
    Eigen::VectorXd ctrl_spec(K), xi(K);

    for (int i = 0; i < n; ++i) {
        gemv_t(E, state.data(), xg.values.data());
        const GridField alpha = control.forward(traj.times[i], xg);
        if (!alpha.values.allFinite()) {
            std::ostringstream os;
            os << "simulate: non-finite control output at step " << i;
            throw NumericError(os.str());
        }
        gemv(E, alpha.values.data(), ctrl_spec.data());
        ctrl_spec *= h;
        for (int k = 0; k < K; ++k) xi[k] = rng.normal();
        kn.fma3(state.data(), c.decay.data(), c.ctrl.data(), ctrl_spec.data(), c.noise.data(),
                xi.data(), K);
        if (!state.allFinite()) {
            std::ostringstream os;
            os << "simulate: non-finite state at step " << i;
            throw NumericError(os.str());
        }
        traj.control_evals.push_back(ctrl_spec);
        traj.noises.push_back(xi);
        traj.states.push_back(state);
    }
    return traj;
}

ControlGradient replay_gradient(const Trajectory& traj, const OUBridgeParams& p,
                                const Control& control, const Eigen::VectorXd& terminal_grad,
                                const RunningGradFn& running_grad) {
    const int K = p.eigs->K;
    const int n = traj.n_steps();
    if (n < 1) throw ConfigError("replay_gradient: empty trajectory");
    if (static_cast<int>(traj.noises.size()) != n)
        throw ConfigError("replay_gradient: missing noise record");
    if (terminal_grad.size() != K) throw ConfigError("replay_gradient: terminal gradient size mismatch");

    if (static_cast<int>(traj.control_evals.size()) != n)
        throw ConfigError("replay_gradient: missing control record");

    const GridSpec& grid = traj.eval_grid;
    const MatrixRM& E = p.eigs->eval_matrix(grid);
    const double h = grid.cell_volume();
    const double dt = traj.times[1] - traj.times[0];
    // simulate() uses uniform steps; verify before reusing one coefficient set
    for (int i = 0; i < n; ++i)
        if (std::abs(traj.times[i + 1] - traj.times[i] - dt) > 1e-12 * p.T)
            throw ConfigError("replay_gradient: non-uniform step sizes");
    const StepCoeffs c = step_coeffs(p, static_cast<SchemeKind>(traj.scheme_kind), dt);

    ControlGradient out;
    out.grad_theta = Eigen::VectorXd::Zero(control.n_params());
    Eigen::VectorXd lambda = terminal_grad;

    GridField xg, cot;
    xg.grid = grid;
    xg.values.resize(grid.num_points());
    cot.grid = grid;
    GridField gx;

    for (int i = n - 1; i >= 0; --i) {
        Eigen::VectorXd cot_ctrl = lambda.cwiseProduct(c.ctrl);
        if (running_grad) {
            const Eigen::VectorXd extra = running_grad(i, traj.states[i], traj.control_evals[i]);
            if (extra.size() == K) cot_ctrl += extra;
        }
        // alpha_spec = h * E * alpha_grid  =>  cot_grid = h * E^T * cot_spec
        cot.values.resize(grid.num_points());
        gemv_t(E, cot_ctrl.data(), cot.values.data());
        cot.values *= h;
        gemv_t(E, traj.states[i].data(), xg.values.data());
        control.vjp(traj.times[i], xg, cot, out.grad_theta, &gx);
        // X_grid = E^T state => state cotangent gains E * grad_x
        Eigen::VectorXd from_input(K);
        gemv(E, gx.values.data(), from_input.data());
        lambda = lambda.cwiseProduct(c.decay) + from_input;
    }
    out.grad_x0 = lambda;
    return out;
}

}  // namespace fsb
