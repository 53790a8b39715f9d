#pragma once

#include <Eigen/Core>
#include <cmath>

namespace fsb {

// Adam with bias correction; moments sized lazily on the first step.
struct AdamOptimizer {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    Eigen::VectorXd m, v;
    int64_t t = 0;

    void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
        if (m.size() != theta.size()) {
            m = Eigen::VectorXd::Zero(theta.size());
            v = Eigen::VectorXd::Zero(theta.size());
        }
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (long i = 0; i < theta.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    }
};

}  // namespace fsb
