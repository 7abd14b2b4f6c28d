#include "fracaug/losses.hpp"

#include "fracaug/errors.hpp"
#include "fracaug/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace fracaug;

TEST_CASE("margin_ce closed forms") {
    // symmetric logits, no margin
    CHECK(margin_ce({0.0, 0.0}, 1, 0.0, 1.0).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // margin 0.5 shifts the true-class logit
    CHECK(margin_ce({0.0, 0.0}, 1, 0.5, 1.0).loss ==
          doctest::Approx(std::log(1.0 + std::exp(0.5))).epsilon(1e-12));
    CHECK(margin_ce({0.0, 0.0}, 1, 0.5, 1.0).loss == doctest::Approx(0.974077).epsilon(1e-5));

    // m = 0 reduces to plain weighted cross-entropy on random logits
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        const std::array<double, 2> s{rng.normal() * 2.0, rng.normal() * 2.0};
        const int y = rng.bernoulli(0.5) ? 1 : 0;
        const double w = rng.uniform(0.5, 3.0);
        const double expected =
            -w * std::log(std::exp(s[static_cast<std::size_t>(y)]) /
                          (std::exp(s[0]) + std::exp(s[1])));
        CHECK(margin_ce(s, y, 0.0, w).loss == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("margin_ce monotone in margin, shift invariant, stable") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const std::array<double, 2> s{rng.normal(), rng.normal()};
        const int y = rng.bernoulli(0.5) ? 1 : 0;
        double prev = margin_ce(s, y, 0.0, 1.0).loss;
        for (double m : {0.1, 0.4, 0.9, 2.0}) {
            const double cur = margin_ce(s, y, m, 1.0).loss;
            CHECK(cur > prev);
            prev = cur;
        }
        const double shift = rng.normal() * 10.0;
        const std::array<double, 2> shifted{s[0] + shift, s[1] + shift};
        CHECK(margin_ce(shifted, y, 0.3, 1.0).loss ==
              doctest::Approx(margin_ce(s, y, 0.3, 1.0).loss).epsilon(1e-10));
    }
    // extreme logits do not overflow
    CHECK(std::isfinite(margin_ce({1000.0, -1000.0}, 0, 0.0, 1.0).loss));
    CHECK(std::isfinite(margin_ce({-1000.0, 1000.0}, 0, 0.0, 1.0).loss));
}

TEST_CASE("margin_ce gradient matches finite differences") {
    Rng rng(6);
    const double h = 1e-6;
    for (int rep = 0; rep < 20; ++rep) {
        const std::array<double, 2> s{rng.normal(), rng.normal()};
        const int y = rng.bernoulli(0.5) ? 1 : 0;
        const double m = rng.uniform(0.0, 1.0);
        const double w = rng.uniform(0.5, 2.0);
        const MarginCeResult res = margin_ce(s, y, m, w);
        for (int j = 0; j < 2; ++j) {
            auto up = s, dn = s;
            up[static_cast<std::size_t>(j)] += h;
            dn[static_cast<std::size_t>(j)] -= h;
            const double fd = (margin_ce(up, y, m, w).loss - margin_ce(dn, y, m, w).loss) / (2 * h);
            CHECK(res.grad_logits[static_cast<std::size_t>(j)] ==
                  doctest::Approx(fd).epsilon(1e-4));
        }
        const double fd_m =
            (margin_ce(s, y, m + h, w).loss - margin_ce(s, y, m - h, w).loss) / (2 * h);
        CHECK(res.grad_margin == doctest::Approx(fd_m).epsilon(1e-4));
    }
}

TEST_CASE("distance_margin geometry") {
    Eigen::VectorXd o(3);
    o << 1.0, 2.0, -0.5;
    CHECK(distance_margin(o, o) == doctest::Approx(0.0));
    CHECK(distance_margin(o, Eigen::VectorXd(-o)) == doctest::Approx(1.0));

    Eigen::VectorXd a(2), b(2);
    a << 1.0, 0.0;
    b << 0.0, 3.0;
    CHECK(distance_margin(a, b) == doctest::Approx(0.5));

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    CHECK(distance_margin(zero, zero) == 0.0);
    CHECK(distance_margin(zero, o) == 0.5);
}

TEST_CASE("wdml closed forms and relation to weighted CE") {
    // all margins zero, unit class counts: plain CE sum
    std::vector<WdmlSample> outputs(2), variants(2);
    for (int i = 0; i < 2; ++i) {
        outputs[static_cast<std::size_t>(i)].logits = {0.0, 0.0};
        outputs[static_cast<std::size_t>(i)].embedding = Eigen::VectorXd::Ones(4);
        variants[static_cast<std::size_t>(i)] = outputs[static_cast<std::size_t>(i)];
    }
    const WdmlResult equal = wdml_batch(outputs, variants, {0, 1}, 1, 1);
    CHECK(equal.loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

    // one sample, orthogonal embeddings, N_1 = 2: 0.5 * ln(1 + e^{0.5})
    std::vector<WdmlSample> one(1), one_frac(1);
    one[0].logits = {0.0, 0.0};
    one[0].embedding = Eigen::VectorXd::Zero(2);
    one[0].embedding(0) = 1.0;
    one_frac[0].logits = {0.0, 0.0};
    one_frac[0].embedding = Eigen::VectorXd::Zero(2);
    one_frac[0].embedding(1) = 1.0;
    const WdmlResult single = wdml_batch(one, one_frac, {1}, 1, 2);
    CHECK(single.loss == doctest::Approx(0.487038).epsilon(1e-5));
    CHECK(single.margins[0] == doctest::Approx(0.5));

    // WDML >= weighted CE at the same logits, equality iff margins vanish
    Rng rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<WdmlSample> o(3), v(3);
        std::vector<int> labels(3);
        double ce = 0.0;
        for (int i = 0; i < 3; ++i) {
            o[static_cast<std::size_t>(i)].logits = {rng.normal(), rng.normal()};
            o[static_cast<std::size_t>(i)].embedding = Eigen::VectorXd::NullaryExpr(
                5, [&rng](Eigen::Index) { return rng.normal(); });
            v[static_cast<std::size_t>(i)].logits = {0.0, 0.0};
            v[static_cast<std::size_t>(i)].embedding = Eigen::VectorXd::NullaryExpr(
                5, [&rng](Eigen::Index) { return rng.normal(); });
            labels[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
            ce += margin_ce(o[static_cast<std::size_t>(i)].logits,
                            labels[static_cast<std::size_t>(i)], 0.0,
                            1.0 / (labels[static_cast<std::size_t>(i)] == 1 ? 2.0 : 1.0))
                      .loss;
        }
        const WdmlResult r = wdml_batch(o, v, labels, 1, 2);
        CHECK(r.loss >= ce - 1e-12);
    }

    CHECK_THROWS_AS(wdml_batch(outputs, variants, {0, 1}, 0, 2), Error);
}

TEST_CASE("ldam margins") {
    const auto equal = ldam_margins(8, 8, 0.5);
    CHECK(equal[0] == doctest::Approx(equal[1]));

    const auto skewed = ldam_margins(16, 1, 0.5);
    CHECK(skewed[1] == doctest::Approx(2.0 * skewed[0]));
    CHECK(skewed[1] == doctest::Approx(0.5));
}
