#pragma once

#include "fracaug/optim.hpp"
#include "fracaug/spectral.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

namespace fracaug {

// Unconstrained parameters of the fractional graph generator. Materialization
// maps them onto the constrained quantities: powers in (0, 3) via 3*sigmoid,
// per-branch weights onto the simplex via softmax, and the branch mix into
// (0, 1) via sigmoid. Reparameterizing (rather than projecting) keeps every
// finite-difference probe point feasible.
struct FggParams {
    Eigen::VectorXd theta_alpha_large;
    Eigen::VectorXd theta_omega_large;
    Eigen::VectorXd theta_alpha_small;
    Eigen::VectorXd theta_omega_small;
    double theta_mix = 0.0;

    static FggParams zeros(int h_large, int h_small);

    int h_large() const { return static_cast<int>(theta_alpha_large.size()); }
    int h_small() const { return static_cast<int>(theta_alpha_small.size()); }
    Eigen::Index num_params() const { return 2 * (h_large() + h_small()) + 1; }

    Eigen::VectorXd flatten() const;
    static FggParams unflatten(const Eigen::VectorXd& flat, int h_large, int h_small);
};

struct FggMaterialized {
    Eigen::VectorXd alpha_large;  // each in (0, 3)
    Eigen::VectorXd omega_large;  // simplex
    Eigen::VectorXd alpha_small;
    Eigen::VectorXd omega_small;
    double mix = 0.5;  // omega, weight of the large-eigenvalue branch
};

FggMaterialized materialize(const FggParams& params);

// The two eigengraph-combination terms g(A, k_l, H_l) and g(A, k_s, H_s);
// a zero-width block yields the zero matrix.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> fgg_branches(const SpectralCache& cache,
                                                         const FggMaterialized& m);

// A' = mix * g_large + (1 - mix) * g_small; symmetric, spectrum in [0, 1].
Eigen::MatrixXd fgg_generate(const SpectralCache& cache, const FggParams& params);
Eigen::MatrixXd fgg_generate(const SpectralCache& cache, const FggMaterialized& m);

struct FggTrainLog {
    std::vector<double> step_losses;  // loss at the incumbent params, per applied step
    double final_fd_step = 0.0;
};

// Derivative-free training driver: central finite differences on the
// unconstrained parameters against an arbitrary loss functional, updated by
// Adam. A non-finite loss at any probe point skips the step, halves fd_step
// and retries once before aborting.
FggTrainLog train_fgg(FggParams& params, const std::function<double(const FggParams&)>& loss,
                      int steps, double fd_step, AdamState& opt_state,
                      const AdamConfig& opt_config);

void save_fgg_params(const std::filesystem::path& file, const FggParams& params);
FggParams load_fgg_params(const std::filesystem::path& file);

}  // namespace fracaug
