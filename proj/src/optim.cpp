#include "fracaug/optim.hpp"

#include "fracaug/errors.hpp"

#include <cmath>
#include <string>

namespace fracaug {

void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               const AdamConfig& config) {
    if (params.size() != grads.size())
        throw contract_violation("adam_step: parameter/gradient size mismatch");
    if (state.first_moment.size() != params.size())
        throw contract_violation("adam_step: optimizer state size mismatch");
    if (!grads.allFinite())
        throw numeric_error("adam_step: non-finite gradient at step " +
                            std::to_string(state.step + 1));

    state.step += 1;
    state.first_moment = config.beta1 * state.first_moment + (1.0 - config.beta1) * grads;
    state.second_moment =
        config.beta2 * state.second_moment + (1.0 - config.beta2) * grads.cwiseProduct(grads);
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    const Eigen::VectorXd m_hat = state.first_moment / bc1;
    const Eigen::VectorXd v_hat = state.second_moment / bc2;
    params -= config.lr * m_hat.cwiseQuotient(
                  v_hat.cwiseSqrt() + Eigen::VectorXd::Constant(params.size(), config.eps));
}

}  // namespace fracaug
