#include "fracaug/metrics.hpp"

#include "fracaug/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace fracaug {

namespace {

void require_aligned(const std::vector<double>& scores, const std::vector<int>& labels,
                     const char* who) {
    if (scores.size() != labels.size())
        throw contract_violation(std::string(who) + ": scores/labels size mismatch");
    if (scores.empty()) throw contract_violation(std::string(who) + ": empty input");
}

}  // namespace

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    require_aligned(scores, labels, "auroc");
    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    const long n_neg = static_cast<long>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw domain_error("auroc: undefined, both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average rank within tie groups, then the rank-sum statistic.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        i = j;
    }
    const double u = pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
    require_aligned(scores, labels, "auprc");
    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    if (n_pos == 0) throw domain_error("auprc: undefined, no positive samples");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    double recall_prev = 0.0;
    long tp = 0;
    long predicted = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) {
            ++predicted;
            if (labels[order[k]] == 1) ++tp;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
        ap += (recall - recall_prev) * precision;
        recall_prev = recall;
        i = j;
    }
    return ap;
}

double macro_f1(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold) {
    require_aligned(scores, labels, "macro_f1");
    long tp[2] = {0, 0}, pred[2] = {0, 0}, truth[2] = {0, 0};
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const int predicted = scores[i] >= threshold ? 1 : 0;
        const int actual = labels[i] == 1 ? 1 : 0;
        ++pred[predicted];
        ++truth[actual];
        if (predicted == actual) ++tp[actual];
    }
    double sum = 0.0;
    for (int c = 0; c < 2; ++c) {
        if (pred[c] == 0 && truth[c] == 0) {
            sum += 1.0;  // degenerate class absent from both sides
        } else if (tp[c] == 0) {
            sum += 0.0;
        } else {
            const double precision = static_cast<double>(tp[c]) / static_cast<double>(pred[c]);
            const double recall = static_cast<double>(tp[c]) / static_cast<double>(truth[c]);
            sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    return sum / 2.0;
}

}  // namespace fracaug
