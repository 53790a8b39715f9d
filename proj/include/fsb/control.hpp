#pragma once

// Markov control alpha(t, x; theta) as a grid-to-grid map with exact
// reverse-mode derivatives. Implementations must be pure given their
// parameters; a single writer updates parameters between batches.

#include <Eigen/Core>

#include "fsb/grid.hpp"

namespace fsb {

class Control {
  public:
    virtual ~Control() = default;

    virtual int n_params() const = 0;
    virtual Eigen::VectorXd& params() = 0;
    virtual const Eigen::VectorXd& params() const = 0;

    virtual GridField forward(double t, const GridField& x) const = 0;

    // Accumulates d<cotangent, forward(t, x)>/dtheta into grad_theta (caller
    // zeroes) and writes the input gradient when grad_x is non-null.
    virtual void vjp(double t, const GridField& x, const GridField& cotangent,
                     Eigen::VectorXd& grad_theta, GridField* grad_x) const = 0;
};

// alpha == 0; the controlled process reduces to the uncontrolled one
class ZeroControl final : public Control {
  public:
    int n_params() const override { return 0; }
    Eigen::VectorXd& params() override { return empty_; }
    const Eigen::VectorXd& params() const override { return empty_; }
    GridField forward(double, const GridField& x) const override {
        return GridField(x.grid, Eigen::VectorXd::Zero(x.values.size()));
    }
    void vjp(double, const GridField& x, const GridField&, Eigen::VectorXd&,
             GridField* grad_x) const override {
        if (grad_x) *grad_x = GridField(x.grid, Eigen::VectorXd::Zero(x.values.size()));
    }

  private:
    Eigen::VectorXd empty_;
};

}  // namespace fsb
