#include "fsb/ou_bridge.hpp"

#include <cmath>
#include <ostream>

#include "fsb/errors.hpp"
#include "fsb/linops.hpp"
#include "fsb/serialize.hpp"

namespace fsb {

void OUBridgeParams::check() const {
    if (!eigs) throw ConfigError("OUBridgeParams: missing eigen-system");
    if (!(sigma >= 0.0)) throw ConfigError("OUBridgeParams: sigma must be >= 0");
    if (!(T > 0.0)) throw ConfigError("OUBridgeParams: T must be > 0");
}

double OUBridgeParams::stationary_var(int k) const {
    return sigma * sigma * eigs->lam[k] / (2.0 * eigs->a[k]);
}

namespace {

void check_mode(const OUBridgeParams& p, int k) {
    if (k < 0 || k >= p.eigs->K) throw ConfigError("mode index out of range");
}

// conditional law of X_{t+s} given X_t = x and X_{t+R} = xT for the pinned
// process over a remaining window of length R >= s. The variance ratio
// var(s)/var(R) = expm1(-2as)/expm1(-2aR) is sigma-free, so sigma = 0
// degenerates cleanly to the deterministic conditional-mean curve.
CoordGaussian conditioned_step(double a, double sig2lam, double s, double R, double x,
                               double xT) {
    if (s <= 0.0) return {x, 0.0};
    if (s >= R) return {xT, 0.0};
    const double ms = std::exp(-a * s);
    const double mR = std::exp(-a * R);
    const double mrem = std::exp(-a * (R - s));
    const double ratio = std::expm1(-2.0 * a * s) / std::expm1(-2.0 * a * R);
    const double var_s = sig2lam * (-std::expm1(-2.0 * a * s)) / (2.0 * a);
    CoordGaussian out;
    out.mean = ms * x + ratio * mrem * (xT - mR * x);
    out.var = std::max(var_s * (1.0 - ratio * mrem * mrem), 0.0);
    return out;
}

}  // namespace

CoordGaussian transition_moments(const OUBridgeParams& p, int k, double tau) {
    check_mode(p, k);
    if (tau < 0.0 || tau > p.T) throw ConfigError("transition_moments: tau outside [0, T]");
    const double a = p.eigs->a[k];
    CoordGaussian out;
    out.mean = std::exp(-a * tau);
    out.var = p.sigma * p.sigma * p.eigs->lam[k] * (-std::expm1(-2.0 * a * tau)) / (2.0 * a);
    return out;
}

double log_rn_density(const OUBridgeParams& p, int k, double t, double x, double y) {
    check_mode(p, k);
    if (t <= 0.0) throw ConfigError("log_rn_density: t must be > 0 (density degenerates)");
    const double a = p.eigs->a[k];
    const double s_inf = p.stationary_var(k);
    const double one_m_e2 = -std::expm1(-2.0 * a * t);
    const double resid = y - std::exp(-a * t) * x;
    return -0.5 * std::log(one_m_e2) - resid * resid / (2.0 * s_inf * one_m_e2) +
           y * y / (2.0 * s_inf);
}

double bridge_drift(const OUBridgeParams& p, int k, double t, double x, double x_T) {
    check_mode(p, k);
    if (t >= p.T) throw ConfigError("bridge_drift: t must be < T");
    const double a = p.eigs->a[k];
    const double tau = p.T - t;
    const double m = std::exp(-a * tau);
    const double correction = 2.0 * a * m / (-std::expm1(-2.0 * a * tau)) * (x_T - m * x);
    return -a * x + correction;
}

CoordGaussian bridge_marginal(const OUBridgeParams& p, int k, double t, double x0, double xT) {
    check_mode(p, k);
    if (t < 0.0 || t > p.T) throw ConfigError("bridge_marginal: t outside [0, T]");
    return conditioned_step(p.eigs->a[k], p.sigma * p.sigma * p.eigs->lam[k], t, p.T, x0, xT);
}

Trajectory sample_bridge_path(const OUBridgeParams& p, const SpectralField& x0,
                              const SpectralField& xT, const std::vector<double>& times,
                              RngStream& rng) {
    p.check();
    const int K = p.eigs->K;
    if (x0.coeffs.size() != K || xT.coeffs.size() != K)
        throw ConfigError("sample_bridge_path: endpoint coefficient count mismatch");
    if (times.size() < 2 || times.front() != 0.0 || times.back() != p.T)
        throw ConfigError("sample_bridge_path: times must run from 0 to T");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw ConfigError("sample_bridge_path: times must be strictly increasing");

    Trajectory traj;
    traj.eigs = p.eigs;
    traj.eval_grid = p.eigs->grid;
    traj.times = times;
    traj.states.reserve(times.size());
    traj.noises.reserve(times.size() - 1);
    traj.states.push_back(x0.coeffs);

    Eigen::VectorXd state = x0.coeffs;
    for (size_t i = 0; i + 1 < times.size(); ++i) {
        const double s = times[i + 1] - times[i];
        const double R = p.T - times[i];
        Eigen::VectorXd z(K);
        for (int k = 0; k < K; ++k) z[k] = rng.normal();
        for (int k = 0; k < K; ++k) {
            const CoordGaussian g = conditioned_step(
                p.eigs->a[k], p.sigma * p.sigma * p.eigs->lam[k], s, R, state[k], xT.coeffs[k]);
            state[k] = g.mean + std::sqrt(g.var) * z[k];
        }
        traj.noises.push_back(std::move(z));
        traj.states.push_back(state);
    }
    return traj;
}

Eigen::VectorXd sample_bridge_marginal(const OUBridgeParams& p, double t,
                                       const Eigen::VectorXd& x0, const Eigen::VectorXd& xT,
                                       RngStream& rng) {
    const int K = p.eigs->K;
    Eigen::VectorXd out(K);
    for (int k = 0; k < K; ++k) {
        const CoordGaussian g = bridge_marginal(p, k, t, x0[k], xT[k]);
        out[k] = g.mean + std::sqrt(g.var) * rng.normal();
    }
    return out;
}

void Trajectory::check() const {
    if (states.size() != times.size()) throw ConfigError("Trajectory: states/times length mismatch");
    if (noises.size() + 1 != times.size()) throw ConfigError("Trajectory: noises length mismatch");
    for (const auto& s : states)
        if (!s.allFinite()) throw NumericError("Trajectory: non-finite state");
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, bool grid_values) {
    if (grid_values) {
        os << "t,grid_index,value\n";
        for (size_t i = 0; i < traj.times.size(); ++i) {
            SpectralField c{traj.eigs, traj.states[i]};
            const GridField g = from_spectral(c, traj.eigs->grid);
            for (int j = 0; j < g.values.size(); ++j)
                os << format_double(traj.times[i]) << ',' << j << ','
                   << format_double(g.values[j]) << '\n';
        }
    } else {
        os << "t,mode_index,coeff\n";
        for (size_t i = 0; i < traj.times.size(); ++i)
            for (int k = 0; k < traj.states[i].size(); ++k)
                os << format_double(traj.times[i]) << ',' << k << ','
                   << format_double(traj.states[i][k]) << '\n';
    }
}

}  // namespace fsb
