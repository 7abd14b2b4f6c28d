#include "fracaug/fgg.hpp"

#include "fracaug/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

namespace fracaug {

namespace {

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

Eigen::VectorXd softmax(const Eigen::VectorXd& theta) {
    if (theta.size() == 0) return theta;
    const double mx = theta.maxCoeff();
    Eigen::VectorXd e = (theta.array() - mx).exp();
    return e / e.sum();
}

}  // namespace

FggParams FggParams::zeros(int h_large, int h_small) {
    if (h_large < 1 || h_small < 1)
        throw contract_violation("FggParams: H_l and H_s must be >= 1");
    FggParams p;
    p.theta_alpha_large = Eigen::VectorXd::Zero(h_large);
    p.theta_omega_large = Eigen::VectorXd::Zero(h_large);
    p.theta_alpha_small = Eigen::VectorXd::Zero(h_small);
    p.theta_omega_small = Eigen::VectorXd::Zero(h_small);
    p.theta_mix = 0.0;
    return p;
}

Eigen::VectorXd FggParams::flatten() const {
    Eigen::VectorXd flat(num_params());
    Eigen::Index k = 0;
    flat.segment(k, h_large()) = theta_alpha_large; k += h_large();
    flat.segment(k, h_large()) = theta_omega_large; k += h_large();
    flat.segment(k, h_small()) = theta_alpha_small; k += h_small();
    flat.segment(k, h_small()) = theta_omega_small; k += h_small();
    flat(k) = theta_mix;
    return flat;
}

FggParams FggParams::unflatten(const Eigen::VectorXd& flat, int h_large, int h_small) {
    if (flat.size() != 2 * (h_large + h_small) + 1)
        throw contract_violation("FggParams::unflatten: size mismatch");
    FggParams p;
    Eigen::Index k = 0;
    p.theta_alpha_large = flat.segment(k, h_large); k += h_large;
    p.theta_omega_large = flat.segment(k, h_large); k += h_large;
    p.theta_alpha_small = flat.segment(k, h_small); k += h_small;
    p.theta_omega_small = flat.segment(k, h_small); k += h_small;
    p.theta_mix = flat(k);
    return p;
}

FggMaterialized materialize(const FggParams& params) {
    FggMaterialized m;
    m.alpha_large = params.theta_alpha_large.unaryExpr([](double t) { return 3.0 * sigmoid(t); });
    m.alpha_small = params.theta_alpha_small.unaryExpr([](double t) { return 3.0 * sigmoid(t); });
    m.omega_large = softmax(params.theta_omega_large);
    m.omega_small = softmax(params.theta_omega_small);
    m.mix = sigmoid(params.theta_mix);
    return m;
}

namespace {

// sum_h omega_h * U diag(lambda^alpha_h) U^T, folded into one rank-k product.
Eigen::MatrixXd branch_term(const Eigen::MatrixXd& u, const Eigen::VectorXd& lambda,
                            const Eigen::VectorXd& omega, const Eigen::VectorXd& alpha) {
    const Eigen::Index n = u.rows();
    if (u.cols() == 0) {
        static bool warned = false;
        if (!warned) {
            std::cerr << "note: fgg branch with zero retained eigenpairs contributes nothing\n";
            warned = true;
        }
        return Eigen::MatrixXd::Zero(n, n);
    }
    Eigen::VectorXd combined = Eigen::VectorXd::Zero(lambda.size());
    for (Eigen::Index h = 0; h < omega.size(); ++h)
        for (Eigen::Index i = 0; i < lambda.size(); ++i)
            combined(i) += omega(h) * std::pow(lambda(i), alpha(h));
    Eigen::MatrixXd out = u * combined.asDiagonal() * u.transpose();
    return 0.5 * (out + out.transpose());
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> fgg_branches(const SpectralCache& cache,
                                                         const FggMaterialized& m) {
    return {branch_term(cache.u_large, cache.lambda_large, m.omega_large, m.alpha_large),
            branch_term(cache.u_small, cache.lambda_small, m.omega_small, m.alpha_small)};
}

Eigen::MatrixXd fgg_generate(const SpectralCache& cache, const FggMaterialized& m) {
    auto [g_large, g_small] = fgg_branches(cache, m);
    return m.mix * g_large + (1.0 - m.mix) * g_small;
}

Eigen::MatrixXd fgg_generate(const SpectralCache& cache, const FggParams& params) {
    return fgg_generate(cache, materialize(params));
}

FggTrainLog train_fgg(FggParams& params, const std::function<double(const FggParams&)>& loss,
                      int steps, double fd_step, AdamState& opt_state,
                      const AdamConfig& opt_config) {
    if (steps < 0) throw contract_violation("train_fgg: steps must be >= 0");
    if (!(fd_step > 0.0)) throw contract_violation("train_fgg: fd_step must be positive");
    const int hl = params.h_large();
    const int hs = params.h_small();
    Eigen::VectorXd flat = params.flatten();
    if (opt_state.first_moment.size() == 0) opt_state = AdamState::zeros(flat.size());

    FggTrainLog log;
    log.final_fd_step = fd_step;
    for (int step = 0; step < steps; ++step) {
        bool applied = false;
        for (int attempt = 0; attempt < 2 && !applied; ++attempt) {
            Eigen::VectorXd grad(flat.size());
            bool finite = true;
            for (Eigen::Index i = 0; i < flat.size() && finite; ++i) {
                Eigen::VectorXd probe = flat;
                probe(i) = flat(i) + log.final_fd_step;
                const double up = loss(FggParams::unflatten(probe, hl, hs));
                probe(i) = flat(i) - log.final_fd_step;
                const double down = loss(FggParams::unflatten(probe, hl, hs));
                if (!std::isfinite(up) || !std::isfinite(down)) {
                    finite = false;
                    break;
                }
                grad(i) = (up - down) / (2.0 * log.final_fd_step);
            }
            if (finite) {
                adam_step(opt_state, flat, grad, opt_config);
                applied = true;
            } else if (attempt == 0) {
                log.final_fd_step /= 2.0;
            } else {
                throw numeric_error("train_fgg: non-finite loss at probe points of step " +
                                    std::to_string(step) + " even after halving fd_step to " +
                                    std::to_string(log.final_fd_step));
            }
        }
        params = FggParams::unflatten(flat, hl, hs);
        log.step_losses.push_back(loss(params));
    }
    return log;
}

void save_fgg_params(const std::filesystem::path& file, const FggParams& params) {
    const FggMaterialized m = materialize(params);
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    nlohmann::json doc;
    doc["H_l"] = params.h_large();
    doc["H_s"] = params.h_small();
    doc["theta_alpha_l"] = vec(params.theta_alpha_large);
    doc["theta_omega_l"] = vec(params.theta_omega_large);
    doc["theta_alpha_s"] = vec(params.theta_alpha_small);
    doc["theta_omega_s"] = vec(params.theta_omega_small);
    doc["theta_mix"] = params.theta_mix;
    doc["materialized"] = {{"alpha_l", vec(m.alpha_large)}, {"omega_l", vec(m.omega_large)},
                           {"alpha_s", vec(m.alpha_small)}, {"omega_s", vec(m.omega_small)},
                           {"omega", m.mix}};
    std::ofstream out(file);
    if (!out) throw format_error("cannot write fgg params " + file.string());
    out << doc.dump(2) << "\n";
}

FggParams load_fgg_params(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw format_error("cannot open fgg params " + file.string());
    nlohmann::json doc;
    in >> doc;
    FggParams p;
    auto vec = [&doc](const char* key) {
        const auto v = doc.at(key).get<std::vector<double>>();
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size())));
    };
    p.theta_alpha_large = vec("theta_alpha_l");
    p.theta_omega_large = vec("theta_omega_l");
    p.theta_alpha_small = vec("theta_alpha_s");
    p.theta_omega_small = vec("theta_omega_s");
    p.theta_mix = doc.at("theta_mix").get<double>();
    return p;
}

}  // namespace fracaug
