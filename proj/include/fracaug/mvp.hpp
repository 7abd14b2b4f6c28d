#pragma once

#include "fracaug/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace fracaug {

struct MvpConfig {
    double tau_normal = 0.05;     // both anomaly probs at or below -> label 0
    double tau_anomalous = 0.95;  // both anomaly probs at or above -> label 1
};

struct PseudoLabelEntry {
    int round = 0;
    int graph_id = 0;
    int label = 0;
    double p = 0.0;
    double p_prime = 0.0;
    long epoch = 0;
};

struct PseudoLabelLedger {
    std::vector<PseudoLabelEntry> entries;

    // One line-delimited JSON record per assignment.
    void save_jsonl(const std::filesystem::path& file) const;
};

// The mutual-verification rule on the anomaly probabilities of a graph and
// its fractional variant. nullopt means abstain.
std::optional<int> pseudo_label(double p, double p_prime, const MvpConfig& config);

struct TrainView {
    std::vector<int> ids;
    std::vector<int> labels;  // ground truth for the original train ids,
                              // pseudo labels for appended ones
};

// Appends the pseudo-labeled subset of `unlabeled_ids` to the train view.
// Receives no ground-truth labels for the unlabeled graphs, by construction.
// Ids already pseudo-labeled this round are skipped.
TrainView expand_training_set(const TrainView& base, const std::vector<int>& unlabeled_ids,
                              const std::vector<double>& scores,
                              const std::vector<double>& scores_frac, const MvpConfig& config,
                              int round, long epoch, PseudoLabelLedger& ledger);

struct Prop1Report {
    double empirical_joint = 0.0;
    double analytic_joint = 0.0;   // delta^2 + rho * delta * (1 - delta)
    double reduction_factor = 0.0; // analytic_joint / delta
    double variance_ratio = 0.0;   // empirical joint-indicator variance / (delta (1 - delta))
    double tolerance = 0.0;        // 4 * sqrt(p (1 - p) / trials)
    bool pass = false;
};

// Monte-Carlo check of the mutual-verification error-rate identity: samples
// correlated Bernoulli error pairs with the given marginal delta and
// correlation rho, and compares the joint error rate against the analytic
// value within 4 Monte-Carlo standard deviations.
Prop1Report prop1_simulate(double delta, double rho, long trials, std::uint64_t seed);

}  // namespace fracaug
