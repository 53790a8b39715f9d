#pragma once

// Bridge Matching: regress the control onto the pinned-bridge drift target
//   target_k = sigma sqrt(lam_k) e^{-a_k tau} (xT_k - e^{-a_k tau} xt_k) / Var_k(tau)
// with (x0, xT) drawn from a coupling, t uniform on [0, T - eps], and the
// intermediate state drawn from the exact bridge marginal.

#include <functional>
#include <memory>

#include "fsb/adam.hpp"
#include "fsb/control_net.hpp"
#include "fsb/ou_bridge.hpp"
#include "fsb/sde.hpp"

namespace fsb {

struct Coupling {
    enum class Kind { IndependentProduct, Paired };
    Kind kind = Kind::IndependentProduct;
    std::function<std::pair<GridField, GridField>(RngStream&)> sample;
};

struct BMConfig {
    int batch_size = 64;
    int64_t n_iters = 20000;
    double lr = 5e-4;
    double ema_rate = 0.999;
    StepScheme scheme{SchemeKind::EulerMaruyama, 30};
    uint64_t seed = 0;
    // the 1/Var(tau) factor diverges at t -> T; exclude a terminal sliver and
    // cap the target's H-norm
    double t_epsilon_frac = 1e-3;
    double target_clamp = 1e4;
    int64_t log_every = 100;

    void check() const;
};

// bridge-drift regression target in spectral coordinates (clamp applied by bm_step)
Eigen::VectorXd regression_target(const OUBridgeParams& p, double t, const Eigen::VectorXd& x_t,
                                  const Eigen::VectorXd& x_T);

struct BMTrainState {
    std::unique_ptr<ControlNet> net;
    Eigen::VectorXd ema_theta;
    AdamOptimizer opt;
    int64_t iter = 0;
};

struct BMStepStats {
    double loss = 0.0;
    double grad_norm = 0.0;
};

BMStepStats bm_step(BMTrainState& state, const BMConfig& config, const OUBridgeParams& p,
                    const Coupling& coupling);

struct TrainLogEntry {
    int64_t iter;
    double loss;
    double grad_norm;
    double wall_ms;
};

using LogSink = std::function<void(const TrainLogEntry&)>;

BMTrainState bm_train(const BMConfig& config, const OUBridgeParams& p, const Coupling& coupling,
                      const ControlNetArch& arch, const LogSink& log = {});

}  // namespace fsb
