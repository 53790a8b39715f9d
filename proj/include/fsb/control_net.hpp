#pragma once

// Resolution-free control network. Per-point lift of [x(p), Fourier features
// of p], then n_layers blocks of (truncated spectral convolution over a
// cosine basis + local linear path + time-modulated scale/shift + residual
// pointwise MLP), then a zero-initialized pointwise linear head, so the
// untrained control is identically zero and the controlled process starts
// out equal to the uncontrolled one.

#include <map>
#include <memory>
#include <mutex>

#include "fsb/control.hpp"
#include "fsb/eigensystem.hpp"

#include <nlohmann/json_fwd.hpp>

namespace fsb {

struct ControlNetArch {
    int dims = 1;
    int n_layers = 3;
    int width = 24;
    int n_spectral_modes = 8;   // per dimension
    int fourier_features_m = 12;
    int time_embed_dim = 64;
    double ff_scale = 2.0;      // frequency-matrix scale (not trained)

    int spectral_modes_total() const {
        return dims == 1 ? n_spectral_modes : n_spectral_modes * n_spectral_modes;
    }
    void check() const;
};

class ControlNet final : public Control {
  public:
    ControlNet(ControlNetArch arch, uint64_t seed);

    const ControlNetArch& arch() const { return arch_; }
    uint64_t init_seed() const { return seed_; }
    int64_t train_step = 0;

    int n_params() const override { return static_cast<int>(theta_.size()); }
    Eigen::VectorXd& params() override { return theta_; }
    const Eigen::VectorXd& params() const override { return theta_; }

    GridField forward(double t, const GridField& x) const override;
    void vjp(double t, const GridField& x, const GridField& cotangent,
             Eigen::VectorXd& grad_theta, GridField* grad_x) const override;

    // forward that keeps intermediates so a later backward pass can reuse them
    struct Trace;
    std::shared_ptr<Trace> forward_trace(double t, const GridField& x, GridField* out) const;
    void backward(const Trace& trace, const GridField& cotangent,
                  Eigen::VectorXd& grad_theta, GridField* grad_x) const;

    nlohmann::ordered_json to_json() const;
    static std::unique_ptr<ControlNet> from_json(const nlohmann::json& j);

  private:
    struct GridFeatures;  // cached per-grid Fourier features and cosine tables
    const GridFeatures& features_for(const GridSpec& g) const;

    ControlNetArch arch_;
    uint64_t seed_;
    Eigen::VectorXd theta_;
    MatrixRM ff_B_;  // fourier_features_m x dims, fixed at init

    mutable std::mutex cache_mutex_;
    mutable std::map<std::string, std::unique_ptr<GridFeatures>> feature_cache_;
};

}  // namespace fsb
