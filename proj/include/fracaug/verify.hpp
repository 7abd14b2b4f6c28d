#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>

namespace fracaug {

struct VerifyResult {
    bool pass = false;
    nlohmann::json report;
};

// Theorem-1 style decay check: seeded PSD matrices with spectra in
// [spec_lo, spec_hi], Chebyshev truncation errors per degree, log-linear fit.
// Passes when every sequence is non-increasing (1e-12 slack), gamma > 0 and
// r^2 > 0.95. `alpha_override` replaces the default {0.3, 0.5, 1.7} sweep.
VerifyResult verify_thm1(int matrices = 10, int n = 16, double spec_lo = 0.1,
                         double spec_hi = 1.0, int t_max = 20,
                         std::optional<double> alpha_override = std::nullopt,
                         std::uint64_t seed = 1);

// Spectral identity ||B - B^alpha|| = max_i |lambda_i - lambda_i^alpha| on
// seeded PSD instances (n <= n_max, alpha drawn from (0, 3) unless pinned).
VerifyResult verify_thm2(int instances = 100, int n_max = 16,
                         std::optional<double> alpha_override = std::nullopt,
                         std::uint64_t seed = 1);

// Proposition-1 Monte Carlo. With delta/rho unset, sweeps the default grid
// {0.05, 0.1, 0.2} x {0, 0.25, 0.5, 1}.
VerifyResult verify_prop1(std::optional<double> delta = std::nullopt,
                          std::optional<double> rho = std::nullopt, long trials = 1000000,
                          std::uint64_t seed = 1);

// Analytic vs central-difference gradients for the GIN network (with an
// injected embedding gradient) and for WDML batches.
VerifyResult verify_gradcheck(std::uint64_t seed = 1);

}  // namespace fracaug
