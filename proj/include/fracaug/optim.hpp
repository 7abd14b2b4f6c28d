#pragma once

#include <Eigen/Core>

namespace fracaug {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Eigen::VectorXd first_moment;
    Eigen::VectorXd second_moment;
    long step = 0;

    static AdamState zeros(Eigen::Index dim) {
        return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim), 0};
    }
};

// Bias-corrected adaptive-moment update. Throws on non-finite gradients,
// leaving params and state untouched.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               const AdamConfig& config);

}  // namespace fracaug
