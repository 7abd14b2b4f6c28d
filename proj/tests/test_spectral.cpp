#include "fracaug/spectral.hpp"

#include "fracaug/errors.hpp"
#include "fracaug/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace fracaug;

namespace {

Eigen::MatrixXd path2() {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, 1, 0;
    return a;
}

Eigen::MatrixXd triangle() {
    Eigen::MatrixXd a(3, 3);
    a << 0, 1, 1, 1, 0, 1, 1, 1, 0;
    return a;
}

Eigen::MatrixXd star4() {  // center node 0, three leaves
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    for (int leaf = 1; leaf < 4; ++leaf) a(0, leaf) = a(leaf, 0) = 1.0;
    return a;
}

Eigen::MatrixXd random_adjacency(int n, double p, Rng& rng) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) a(i, j) = a(j, i) = 1.0;
    return a;
}

Eigen::MatrixXd random_symmetric(int n, Rng& rng) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    return Eigen::MatrixXd(0.5 * (m + m.transpose()));
}

// PSD matrix with spectrum inside [lo, hi], built from a rotated diagonal.
Eigen::MatrixXd random_psd(int n, double lo, double hi, Rng& rng) {
    Eigen::MatrixXd g(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) g(r, c) = rng.normal();
    for (int c = 0; c < n; ++c) {
        for (int k = 0; k < c; ++k) g.col(c) -= g.col(k).dot(g.col(c)) * g.col(k);
        g.col(c).normalize();
    }
    Eigen::VectorXd eigs(n);
    for (int i = 0; i < n; ++i) eigs(i) = rng.uniform(lo, hi);
    Eigen::MatrixXd m = g * eigs.asDiagonal() * g.transpose();
    return Eigen::MatrixXd(0.5 * (m + m.transpose()));
}

}  // namespace

TEST_CASE("normalize_adjacency closed forms") {
    const Eigen::MatrixXd p2 = normalize_adjacency(path2());
    CHECK(p2(0, 1) == doctest::Approx(1.0));
    CHECK(p2(0, 0) == 0.0);

    const Eigen::MatrixXd k3 = normalize_adjacency(triangle());
    CHECK(k3(0, 1) == doctest::Approx(0.5));
    CHECK(k3(1, 2) == doctest::Approx(0.5));
    CHECK(k3(0, 0) == 0.0);

    const Eigen::MatrixXd s = normalize_adjacency(star4());
    CHECK(s(0, 1) == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(s(1, 2) == 0.0);
}

TEST_CASE("normalize_adjacency handles isolated nodes and rejects bad input") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    a(0, 1) = a(1, 0) = 1.0;  // node 2 isolated
    const Eigen::MatrixXd t = normalize_adjacency(a);
    CHECK(t.row(2).cwiseAbs().sum() == 0.0);
    CHECK(t.col(2).cwiseAbs().sum() == 0.0);

    Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(normalize_adjacency(asym), Error);

    Eigen::MatrixXd loop = Eigen::MatrixXd::Zero(2, 2);
    loop(0, 0) = 1.0;
    CHECK_THROWS_AS(normalize_adjacency(loop), Error);
}

TEST_CASE("hat_transform closed forms") {
    const Eigen::MatrixXd h2 = hat_transform(normalize_adjacency(path2()));
    CHECK(h2(0, 0) == doctest::Approx(0.5));
    CHECK(h2(0, 1) == doctest::Approx(0.5));
    const SymEvd evd2 = sym_evd(h2);
    CHECK(evd2.values(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(evd2.values(1) == doctest::Approx(0.0).epsilon(1e-10));

    const Eigen::MatrixXd h3 = hat_transform(normalize_adjacency(triangle()));
    CHECK(h3(0, 0) == doctest::Approx(0.5));
    CHECK(h3(0, 1) == doctest::Approx(0.25));
    const SymEvd evd3 = sym_evd(h3);
    CHECK(evd3.values(0) == doctest::Approx(1.0));
    CHECK(evd3.values(1) == doctest::Approx(0.25));
    CHECK(evd3.values(2) == doctest::Approx(0.25));

    // no edges: A_tilde = 0, A_hat = I/2
    const Eigen::MatrixXd empty = hat_transform(normalize_adjacency(Eigen::MatrixXd::Zero(3, 3)));
    CHECK((empty - 0.5 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sym_evd: ordering, reconstruction residual, orthonormality") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    d(2, 2) = 2.0;
    const SymEvd evd = sym_evd(d);
    CHECK(evd.values(0) == doctest::Approx(3.0));
    CHECK(evd.values(1) == doctest::Approx(2.0));
    CHECK(evd.values(2) == doctest::Approx(1.0));

    const SymEvd p2 = sym_evd(hat_transform(normalize_adjacency(path2())));
    CHECK(std::abs(p2.vectors(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(std::abs(p2.vectors(1, 1)) == doctest::Approx(1.0 / std::sqrt(2.0)));

    Rng rng(42);
    for (int rep = 0; rep < 5; ++rep) {
        const Eigen::MatrixXd m = random_symmetric(8, rng);
        const SymEvd e = sym_evd(m);
        const Eigen::MatrixXd recon = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
        const double residual = (m - recon).norm();
        CHECK(residual <= 1e-8 * std::max(1.0, m.norm()));
        const Eigen::MatrixXd gram = e.vectors.transpose() * e.vectors;
        CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
        for (int i = 1; i < 8; ++i) CHECK(e.values(i - 1) >= e.values(i));
    }
}

TEST_CASE("truncate_evd widths and clamping") {
    Rng rng(7);
    const auto evd26 = sym_evd(hat_transform(normalize_adjacency(random_adjacency(26, 0.2, rng))));
    const SpectralCache c1 = truncate_evd(evd26, 4, 3);
    CHECK(c1.k_large() == 4);
    CHECK(c1.k_small() == 3);
    CHECK(c1.lambda_large(0) >= c1.lambda_large(3));
    CHECK(c1.lambda_small(0) <= c1.lambda_small(2));
    for (int i = 0; i < 4; ++i) {
        CHECK(c1.lambda_large(i) >= 0.0);
        CHECK(c1.lambda_large(i) <= 1.0);
    }
    // orthonormal columns
    const Eigen::MatrixXd gram = c1.u_large.transpose() * c1.u_large;
    CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);

    const auto evd3 = sym_evd(hat_transform(normalize_adjacency(triangle())));
    const SpectralCache c2 = truncate_evd(evd3, 4, 4);
    CHECK(c2.k_large() == 3);
    CHECK(c2.k_small() == 0);

    const auto evd5 = sym_evd(hat_transform(normalize_adjacency(random_adjacency(5, 0.5, rng))));
    const SpectralCache c3 = truncate_evd(evd5, 3, 3);
    CHECK(c3.k_large() == 3);
    CHECK(c3.k_small() == 2);

    SymEvd empty;
    empty.values.resize(0);
    empty.vectors.resize(0, 0);
    CHECK_THROWS_AS(truncate_evd(empty, 1, 1), Error);

    SymEvd bad;
    bad.values = Eigen::VectorXd::Constant(1, 2.0);  // outside [0,1] band
    bad.vectors = Eigen::MatrixXd::Identity(1, 1);
    CHECK_THROWS_AS(truncate_evd(bad, 1, 1), Error);
}

TEST_CASE("fractional_power closed forms and properties") {
    const Eigen::MatrixXd hat2 = hat_transform(normalize_adjacency(path2()));
    for (double alpha : {0.3, 1.0, 2.5}) {
        const Eigen::MatrixXd p = fractional_power(sym_evd(hat2), alpha);
        CHECK((p - hat2).cwiseAbs().maxCoeff() < 1e-12);  // idempotent spectrum {0, 1}
    }

    // K3: A_hat^0.5 = diag 2/3, off-diagonal 1/6
    const Eigen::MatrixXd hat3 = hat_transform(normalize_adjacency(triangle()));
    const Eigen::MatrixXd half = fractional_power(sym_evd(hat3), 0.5);
    CHECK(half(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(half(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-10));

    Rng rng(11);
    const Eigen::MatrixXd m = random_psd(6, 0.0, 1.0, rng);
    const SymEvd evd = sym_evd(m);
    CHECK((fractional_power(evd, 1.0) - m).norm() < 1e-8);

    CHECK_THROWS_AS(fractional_power(evd, -0.5), Error);

    // sign invariance of the eigengraph sum
    SymEvd flipped = evd;
    flipped.vectors.col(0) = -flipped.vectors.col(0);
    flipped.vectors.col(3) = -flipped.vectors.col(3);
    CHECK((fractional_power(evd, 0.7) - fractional_power(flipped, 0.7)).cwiseAbs().maxCoeff() <
          1e-12);

    // semigroup on a shared eigenbasis
    const Eigen::MatrixXd a = fractional_power(evd, 0.4);
    const Eigen::MatrixXd b = fractional_power(evd, 1.1);
    const Eigen::MatrixXd ab = fractional_power(evd, 1.5);
    CHECK((a * b - ab).norm() < 1e-7);

    // spectrum preservation
    const Eigen::MatrixXd hat26 = hat_transform(normalize_adjacency(random_adjacency(12, 0.3, rng)));
    const SymEvd base = sym_evd(hat26);
    const SymEvd powered = sym_evd(fractional_power(base, 0.5));
    for (int i = 0; i < 12; ++i) {
        const double expected = std::pow(std::max(base.values(i), 0.0), 0.5);
        // both sorted descending; x^0.5 is monotone so order is preserved
        CHECK(powered.values(i) == doctest::Approx(expected).epsilon(1e-8));
    }

    // 0^0 = 1 exactly at alpha == 0: power of a singular matrix has the full
    // eigengraph sum (the identity, for an orthonormal basis).
    Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
    singular(0, 0) = 1.0;
    const Eigen::MatrixXd at_zero = fractional_power(sym_evd(singular), 0.0);
    CHECK((at_zero - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("chebyshev_coeffs: alpha 0, exact linear, grid-oracle decay") {
    const ChebyshevApprox zero = chebyshev_coeffs(0.0, 0.2, 1.0, 3);
    CHECK(zero.coeffs[0] == doctest::Approx(1.0).epsilon(1e-10));
    for (int t = 1; t <= 3; ++t) CHECK(std::abs(zero.coeffs[static_cast<std::size_t>(t)]) < 1e-10);

    const ChebyshevApprox linear = chebyshev_coeffs(1.0, 0.1, 1.0, 1);
    double worst = 0.0;
    for (int i = 0; i < 512; ++i) {
        const double x = 0.1 + 0.9 * i / 511.0;
        worst = std::max(worst, std::abs(linear.eval(x) - x));
    }
    CHECK(worst < 1e-12);

    // sup-norm error on a dense grid shrinks with the degree
    auto grid_error = [](const ChebyshevApprox& approx) {
        double w = 0.0;
        for (int i = 0; i < 2048; ++i) {
            const double x = approx.lo + (approx.hi - approx.lo) * i / 2047.0;
            w = std::max(w, std::abs(approx.eval(x) - std::pow(x, approx.alpha)));
        }
        return w;
    };
    const double e5 = grid_error(chebyshev_coeffs(0.5, 0.1, 1.0, 5));
    const double e10 = grid_error(chebyshev_coeffs(0.5, 0.1, 1.0, 10));
    const double e20 = grid_error(chebyshev_coeffs(0.5, 0.1, 1.0, 20));
    CHECK(e10 < e5);
    CHECK(e20 < e10);

    CHECK_THROWS_AS(chebyshev_coeffs(0.5, 0.0, 1.0, 4), Error);
    CHECK_THROWS_AS(chebyshev_coeffs(0.5, -0.3, 1.0, 4), Error);
}

TEST_CASE("chebyshev_apply: scalar oracle, exact polynomial, identity") {
    Eigen::MatrixXd half_scalar(1, 1);
    half_scalar(0, 0) = 0.5;
    const Eigen::MatrixXd r = chebyshev_apply(chebyshev_coeffs(0.5, 0.4, 0.6, 8), half_scalar);
    CHECK(std::abs(r(0, 0) - std::sqrt(0.5)) < 1e-6);

    Eigen::MatrixXd diag3 = Eigen::MatrixXd::Zero(3, 3);
    diag3(0, 0) = 0.25;
    diag3(1, 1) = 0.25;
    diag3(2, 2) = 1.0;
    const Eigen::MatrixXd squared = chebyshev_apply(chebyshev_coeffs(2.0, 0.2, 1.0, 2), diag3);
    CHECK((squared - diag3 * diag3).cwiseAbs().maxCoeff() < 1e-10);

    const ChebyshevApprox approx = chebyshev_coeffs(0.7, 0.5, 1.5, 6);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd pid = chebyshev_apply(approx, id);
    CHECK((pid - approx.eval(1.0) * id).cwiseAbs().maxCoeff() < 1e-12);

    // eigenvalue outside the interval is rejected
    Eigen::MatrixXd outside = Eigen::MatrixXd::Identity(2, 2);
    outside(0, 0) = 2.0;
    CHECK_THROWS_AS(chebyshev_apply(chebyshev_coeffs(0.5, 0.4, 1.0, 4), outside), Error);
}

TEST_CASE("chebyshev vs EVD cross-check at high degree") {
    Rng rng(3);
    for (int rep = 0; rep < 3; ++rep) {
        const Eigen::MatrixXd m = random_psd(8, 0.15, 1.0, rng);
        const double alpha = 0.5;
        const Eigen::MatrixXd via_cheb = chebyshev_apply(chebyshev_coeffs(alpha, 0.1, 1.0, 30), m);
        const Eigen::MatrixXd via_evd = fractional_power(sym_evd(m), alpha);
        CHECK(operator_norm(via_cheb - via_evd) < 1e-6);
    }
}

TEST_CASE("thm1 decay: fit quality, polynomial case, interval dependence") {
    Rng rng(5);
    const Eigen::MatrixXd m = random_psd(10, 0.1, 1.0, rng);
    const DecayFit fit = thm1_decay_check(m, 0.5, 20);
    CHECK(fit.r_squared > 0.98);
    CHECK(fit.gamma > 0.0);
    for (std::size_t t = 1; t < fit.errors.size(); ++t)
        CHECK(fit.errors[t] <= fit.errors[t - 1] + 1e-12);
    CHECK(fit.errors.back() < fit.errors.front());

    // exact polynomial: alpha = 2 truncates to zero error from degree 2 on
    const DecayFit quad = thm1_decay_check(m, 2.0, 8);
    for (std::size_t t = 2; t < quad.errors.size(); ++t) CHECK(quad.errors[t] < 1e-12);

    // a spectrum further from the branch point converges faster
    const Eigen::MatrixXd near = random_psd(10, 0.05, 1.0, rng);
    const Eigen::MatrixXd far = random_psd(10, 0.5, 1.0, rng);
    const DecayFit fit_near = thm1_decay_check(near, 0.5, 18);
    const DecayFit fit_far = thm1_decay_check(far, 0.5, 18);
    CHECK(fit_far.gamma > fit_near.gamma);

    Eigen::MatrixXd not_pd = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(thm1_decay_check(not_pd, 0.5, 5), Error);
}

TEST_CASE("thm2 identity") {
    const Thm2Report id = thm2_identity_check(Eigen::MatrixXd::Identity(4, 4), 0.7);
    CHECK(id.lhs == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(id.rhs == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(id.pass);

    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(2, 2);
    d2(0, 0) = 0.25;
    d2(1, 1) = 1.0;
    const Thm2Report quarter = thm2_identity_check(d2, 0.5);
    CHECK(quarter.lhs == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(quarter.rhs == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(quarter.pass);

    // perturbed K3 hat matrix, projected back to PSD
    Rng rng(9);
    Eigen::MatrixXd pert(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) pert(i, j) = rng.normal();
    pert = 0.5 * (pert + pert.transpose());
    pert *= 0.01 / operator_norm(pert);
    Eigen::MatrixXd b = hat_transform(normalize_adjacency(triangle())) + pert;
    SymEvd evd = sym_evd(b);
    b = fractional_power(evd.values.cwiseMax(0.0), evd.vectors, 1.0);  // PSD projection
    const Thm2Report rep = thm2_identity_check(b, 0.5);
    CHECK(rep.pass);
}

TEST_CASE("spectral cache sidecar round-trip and invalidation") {
    Rng rng(21);
    std::vector<SpectralCache> caches;
    for (int i = 0; i < 3; ++i)
        caches.push_back(preprocess_graph(random_adjacency(6 + i, 0.4, rng), 3, 2));

    const auto file = std::filesystem::temp_directory_path() / "fracaug_cache_test.json";
    save_cache_file(file, 12345u, 3, 2, caches);

    std::vector<SpectralCache> loaded;
    REQUIRE(load_cache_file(file, 12345u, 3, 2, loaded));
    REQUIRE(loaded.size() == caches.size());
    for (std::size_t i = 0; i < caches.size(); ++i) {
        CHECK((loaded[i].u_large - caches[i].u_large).cwiseAbs().maxCoeff() == 0.0);
        CHECK((loaded[i].lambda_large - caches[i].lambda_large).cwiseAbs().maxCoeff() == 0.0);
        CHECK((loaded[i].u_small - caches[i].u_small).cwiseAbs().maxCoeff() == 0.0);
        CHECK((loaded[i].lambda_small - caches[i].lambda_small).cwiseAbs().maxCoeff() == 0.0);
    }

    std::vector<SpectralCache> reject;
    CHECK_FALSE(load_cache_file(file, 999u, 3, 2, reject));   // wrong dataset hash
    CHECK_FALSE(load_cache_file(file, 12345u, 4, 2, reject)); // wrong k_l
    std::filesystem::remove(file);
}
