#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

namespace fracaug {

// Dense symmetric eigendecomposition result. Eigenvalues descending,
// eigenvectors orthonormal in the columns of `vectors`.
struct SymEvd {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

// Truncated eigenpairs of one graph's hat-transformed adjacency: the k_l
// largest and k_s smallest eigenpairs, with the blocks never sharing a pair.
struct SpectralCache {
    Eigen::MatrixXd u_large;       // n x k_l
    Eigen::VectorXd lambda_large;  // descending, in [0, 1]
    Eigen::MatrixXd u_small;       // n x k_s
    Eigen::VectorXd lambda_small;  // ascending, in [0, 1]

    int num_nodes() const { return static_cast<int>(u_large.rows()); }
    int k_large() const { return static_cast<int>(u_large.cols()); }
    int k_small() const { return static_cast<int>(u_small.cols()); }
};

// Truncated Chebyshev expansion of x^alpha on [a, b] subset of (0, inf).
struct ChebyshevApprox {
    double alpha = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> coeffs;  // c_0 .. c_T

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    // p_T at a scalar point inside [lo, hi].
    double eval(double x) const;
};

// Exponential-decay fit of Chebyshev truncation errors, log(e_T) ~ log(beta) - gamma*T.
struct DecayFit {
    std::vector<double> errors;  // operator-norm error per degree, e_0 .. e_Tmax
    double beta = 0.0;
    double gamma = 0.0;  // +inf sentinel when all errors sit below the noise floor
    double r_squared = 0.0;
    bool envelope_ok = false;  // errors[T] <= beta*exp(-gamma*T)*1.05 over the fitted range
    bool degenerate = false;   // polynomial case: every error below 1e-13

    static constexpr double kInfGamma = std::numeric_limits<double>::infinity();
};

struct Thm2Report {
    double lhs = 0.0;  // ||B - B^alpha||_2
    double rhs = 0.0;  // max_i |lambda_i - lambda_i^alpha|
    bool pass = false;
};

// A_tilde = D^{-1/2} A D^{-1/2}; rows of isolated nodes stay all-zero.
Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& adjacency);

// A_hat = (I + A_tilde) / 2, shifting the spectrum from [-1, 1] into [0, 1].
Eigen::MatrixXd hat_transform(const Eigen::MatrixXd& normalized);

// Cyclic Jacobi diagonalization. Residual contract:
// ||M - U L U^T||_F <= 1e-8 * max(1, ||M||_F).
SymEvd sym_evd(const Eigen::MatrixXd& m);

// Select the k_l largest and k_s smallest eigenpairs of an EVD of A_hat;
// k_l is clamped to n and k_s to n - k_l. Eigenvalues are validated against
// [-1e-10, 1 + 1e-10] and clamped into [0, 1].
SpectralCache truncate_evd(const SymEvd& evd, int k_large, int k_small);

// Sum over the supplied eigenpairs of lambda^alpha * u u^T. Requires
// alpha >= 0 and eigenvalues >= 0 (0^0 := 1 only at alpha == 0 exactly).
Eigen::MatrixXd fractional_power(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                                 double alpha);
Eigen::MatrixXd fractional_power(const SymEvd& evd, double alpha);

// Coefficients of the degree-T Chebyshev expansion of x^alpha on [a, b],
// computed by Chebyshev-Gauss quadrature with max(64, 4T) nodes.
ChebyshevApprox chebyshev_coeffs(double alpha, double lo, double hi, int degree);

// p_T(M) through the three-term recurrence on the affinely rescaled matrix.
// Every eigenvalue of M must lie inside [lo, hi].
Eigen::MatrixXd chebyshev_apply(const ChebyshevApprox& approx, const Eigen::MatrixXd& m);

// Largest |eigenvalue| of a symmetric matrix.
double operator_norm(const Eigen::MatrixXd& symmetric);

// errors[T] = ||M^alpha - p_T(M)||_2 for T = 0..t_max, plus the log-linear
// decay fit over the region where errors exceed 1e-13.
DecayFit thm1_decay_check(const Eigen::MatrixXd& m, double alpha, int t_max);

// Spectral identity ||B - B^alpha||_2 = max_i |lambda_i - lambda_i^alpha| for
// symmetric PSD B.
Thm2Report thm2_identity_check(const Eigen::MatrixXd& b, double alpha);

// Builds the per-graph cache of Algorithm "preprocess": hat_transform of the
// normalized adjacency, dense EVD, truncation.
SpectralCache preprocess_graph(const Eigen::MatrixXd& adjacency, int k_large, int k_small);

// Sidecar persistence for a dataset's caches, keyed by (dataset hash, k_l, k_s).
// load returns false (and leaves `caches` untouched) when the file is absent
// or its key does not match.
void save_cache_file(const std::filesystem::path& file, std::uint64_t dataset_hash, int k_large,
                     int k_small, const std::vector<SpectralCache>& caches);
bool load_cache_file(const std::filesystem::path& file, std::uint64_t dataset_hash, int k_large,
                     int k_small, std::vector<SpectralCache>& caches);

}  // namespace fracaug
