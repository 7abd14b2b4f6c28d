#include "fracaug/metrics.hpp"

#include "fracaug/errors.hpp"
#include "fracaug/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace fracaug;

namespace {

// O(n^2) pair-counting oracle for AUROC, ties worth one half.
double auroc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Threshold-sweep oracle for average precision: recompute precision and
// recall from scratch at every unique threshold, descending.
double auprc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    double ap = 0.0;
    double prev_recall = 0.0;
    for (double threshold : thresholds) {
        long tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= threshold) (labels[i] == 1 ? tp : fp) += 1;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

}  // namespace

TEST_CASE("auroc basics") {
    CHECK(auroc({0.9, 0.1}, {1, 0}) == doctest::Approx(1.0));
    CHECK(auroc({0.1, 0.9}, {1, 0}) == doctest::Approx(0.0));
    CHECK(auroc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(auroc({0.5, 0.6}, {1, 1}), Error);

    // invariance under strictly increasing transforms
    Rng rng(17);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
        scores.push_back(rng.uniform());
        labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
    }
    labels[0] = 1;
    labels[1] = 0;
    std::vector<double> warped(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) warped[i] = std::exp(3.0 * scores[i]) + 2.0;
    CHECK(auroc(scores, labels) == doctest::Approx(auroc(warped, labels)).epsilon(1e-12));
}

TEST_CASE("auprc basics") {
    // perfect ranking, 3 positives / 7 negatives
    std::vector<double> scores{0.99, 0.98, 0.97, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1, 0.05};
    std::vector<int> labels{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    CHECK(auprc(scores, labels) == doctest::Approx(1.0));

    // all tied: one operating point at prevalence
    std::vector<double> tied(10, 0.3);
    std::vector<int> lab(10, 0);
    lab[0] = lab[1] = lab[2] = 1;
    CHECK(auprc(tied, lab) == doctest::Approx(0.3));

    CHECK_THROWS_AS(auprc({0.5, 0.6}, {0, 0}), Error);
}

TEST_CASE("metric oracles on random tie-heavy instances") {
    Rng rng(99);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> scores(20);
        std::vector<int> labels(20, 0);
        for (int i = 0; i < 20; ++i) {
            // quantized scores force ties
            scores[static_cast<std::size_t>(i)] =
                0.1 * static_cast<double>(rng.uniform_index(11));
            labels[static_cast<std::size_t>(i)] = rng.bernoulli(0.35) ? 1 : 0;
        }
        labels[0] = 1;
        labels[1] = 0;
        CHECK(auroc(scores, labels) ==
              doctest::Approx(auroc_bruteforce(scores, labels)).epsilon(1e-12));
        CHECK(auprc(scores, labels) ==
              doctest::Approx(auprc_bruteforce(scores, labels)).epsilon(1e-12));
    }
}

TEST_CASE("macro_f1 closed forms") {
    CHECK(macro_f1({0.9, 0.9, 0.1, 0.1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(macro_f1({0.1, 0.1, 0.9, 0.9}, {1, 1, 0, 0}) == doctest::Approx(0.0));

    // all predicted normal on a balanced set: (2/3 + 0) / 2
    CHECK(macro_f1({0.1, 0.2, 0.3, 0.4}, {0, 1, 0, 1}) == doctest::Approx((2.0 / 3.0) / 2.0));

    // single-class truth, all predicted that class: the absent class
    // contributes the degenerate 1
    CHECK(macro_f1({0.1, 0.2}, {0, 0}) == doctest::Approx(1.0));
}
