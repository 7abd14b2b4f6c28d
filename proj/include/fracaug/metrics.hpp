#pragma once

#include <vector>

namespace fracaug {

// Probability that a random positive outranks a random negative, ties
// counted 1/2 (Mann-Whitney statistic, computed via average ranks).
// Both classes must be present.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Average precision: sum over descending unique thresholds of
// (R_k - R_{k-1}) * P_k. At least one positive required.
double auprc(const std::vector<double>& scores, const std::vector<int>& labels);

// Macro-averaged F1 at a fixed decision threshold on the anomaly score.
// A class with zero predicted and zero true members contributes 1;
// zero predicted but nonzero true contributes 0.
double macro_f1(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold = 0.5);

}  // namespace fracaug
