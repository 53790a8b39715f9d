#pragma once

// Closed-form per-coordinate analytics of the uncontrolled OU process
//   dX_k = -a_k X_k dt + sigma sqrt(lam_k) dW_k
// and of its pinned (h-transform) bridge: transition moments, the
// Radon-Nikodym density of the time-t law against the invariant Gaussian
// N(0, s_inf) with s_inf = sigma^2 lam_k / (2 a_k), the bridge drift, bridge
// marginals, and exact bridge sampling by sequential re-conditioning.
//
// Small-exponent paths go through expm1 so the a -> 0 Brownian-bridge limit
// is exact to float precision.

#include "fsb/eigensystem.hpp"
#include "fsb/rng.hpp"
#include "fsb/trajectory.hpp"

namespace fsb {

struct OUBridgeParams {
    EigenSystemPtr eigs;
    double sigma;  // diffusion scale, > 0 (0 allowed for deterministic flows)
    double T;      // horizon, > 0

    void check() const;
    double stationary_var(int k) const;  // s_inf = sigma^2 lam_k / (2 a_k)
};

struct CoordGaussian {
    double mean = 0.0;
    double var = 0.0;
};

// Law of X_{t+tau} given X_t = x is N(mean_factor * x, var); the mean slot
// carries the factor e^{-a_k tau}.
CoordGaussian transition_moments(const OUBridgeParams& p, int k, double tau);

// log q_t(x, y): density of N(e^{-a t} x, var(t)) against N(0, s_inf)
double log_rn_density(const OUBridgeParams& p, int k, double t, double x, double y);

// total drift of the pinned SDE at time t < T: linear part plus h-transform
// correction toward x_T
double bridge_drift(const OUBridgeParams& p, int k, double t, double x, double x_T);

// law of X_t | X_0 = x0, X_T = xT (actual mean, not a factor)
CoordGaussian bridge_marginal(const OUBridgeParams& p, int k, double t, double x0, double xT);

// exact bridge sampling: each step draws from the Gaussian law of
// X_{t_{i+1}} | (X_{t_i}, X_T); no discretization error, endpoints exact
Trajectory sample_bridge_path(const OUBridgeParams& p, const SpectralField& x0,
                              const SpectralField& xT, const std::vector<double>& times,
                              RngStream& rng);

// one bridge-marginal draw across all coordinates (used by training loops)
Eigen::VectorXd sample_bridge_marginal(const OUBridgeParams& p, double t,
                                       const Eigen::VectorXd& x0, const Eigen::VectorXd& xT,
                                       RngStream& rng);

}  // namespace fsb
