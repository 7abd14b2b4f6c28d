#include "fracaug/mvp.hpp"

#include "fracaug/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

namespace fracaug {

void PseudoLabelLedger::save_jsonl(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw format_error("cannot write ledger " + file.string());
    for (const auto& e : entries) {
        nlohmann::json rec;
        rec["round"] = e.round;
        rec["graph_id"] = e.graph_id;
        rec["label"] = e.label;
        rec["p"] = e.p;
        rec["p_prime"] = e.p_prime;
        rec["epoch"] = e.epoch;
        out << rec.dump() << "\n";
    }
}

std::optional<int> pseudo_label(double p, double p_prime, const MvpConfig& config) {
    if (!(config.tau_normal < config.tau_anomalous))
        throw contract_violation("pseudo_label: tau_n must be below tau_a");
    if (p < 0.0 || p > 1.0 || p_prime < 0.0 || p_prime > 1.0)
        throw contract_violation("pseudo_label: probabilities must lie in [0, 1]");
    if (p <= config.tau_normal && p_prime <= config.tau_normal) return 0;
    if (p >= config.tau_anomalous && p_prime >= config.tau_anomalous) return 1;
    return std::nullopt;
}

TrainView expand_training_set(const TrainView& base, const std::vector<int>& unlabeled_ids,
                              const std::vector<double>& scores,
                              const std::vector<double>& scores_frac, const MvpConfig& config,
                              int round, long epoch, PseudoLabelLedger& ledger) {
    if (unlabeled_ids.size() != scores.size() || unlabeled_ids.size() != scores_frac.size())
        throw contract_violation("expand_training_set: input lists are not aligned");
    std::set<int> base_ids(base.ids.begin(), base.ids.end());
    for (int id : unlabeled_ids)
        if (base_ids.count(id))
            throw contract_violation("expand_training_set: id " + std::to_string(id) +
                                     " already in the training set");

    std::set<int> assigned_this_round;
    for (const auto& e : ledger.entries)
        if (e.round == round) assigned_this_round.insert(e.graph_id);

    TrainView view = base;
    for (std::size_t i = 0; i < unlabeled_ids.size(); ++i) {
        const auto label = pseudo_label(scores[i], scores_frac[i], config);
        if (!label) continue;
        if (assigned_this_round.count(unlabeled_ids[i])) continue;  // dedup within the round
        view.ids.push_back(unlabeled_ids[i]);
        view.labels.push_back(*label);
        ledger.entries.push_back(PseudoLabelEntry{round, unlabeled_ids[i], *label, scores[i],
                                                  scores_frac[i], epoch});
        assigned_this_round.insert(unlabeled_ids[i]);
    }
    return view;
}

Prop1Report prop1_simulate(double delta, double rho, long trials, std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 1.0))
        throw domain_error("prop1_simulate: delta must lie in (0, 1)");
    const double rho_floor = std::max(-delta / (1.0 - delta), -(1.0 - delta) / delta);
    if (rho < rho_floor - 1e-12 || rho > 1.0 + 1e-12)
        throw domain_error("prop1_simulate: rho " + std::to_string(rho) +
                           " infeasible for Bernoulli(" + std::to_string(delta) +
                           ") marginals; feasible range [" + std::to_string(rho_floor) + ", 1]");
    if (trials < 10000) throw contract_violation("prop1_simulate: need at least 1e4 trials");

    // Joint table from the two constraints: matching marginals and
    // P(both wrong) = delta^2 + rho * delta * (1 - delta).
    const double p11 = std::clamp(delta * delta + rho * delta * (1.0 - delta), 0.0, delta);
    const double p10 = delta - p11;  // first wrong, second right
    const double p01 = p10;

    Rng rng = Rng(seed).child("prop1");
    long both_wrong = 0;
    for (long t = 0; t < trials; ++t) {
        const double u = rng.uniform();
        bool err_original, err_fractional;
        if (u < p11) {
            err_original = err_fractional = true;
        } else if (u < p11 + p10) {
            err_original = true;
            err_fractional = false;
        } else if (u < p11 + p10 + p01) {
            err_original = false;
            err_fractional = true;
        } else {
            err_original = err_fractional = false;
        }
        if (err_original && err_fractional) ++both_wrong;
    }
    Prop1Report report;
    report.analytic_joint = p11;
    report.empirical_joint = static_cast<double>(both_wrong) / static_cast<double>(trials);
    report.reduction_factor = report.analytic_joint / delta;
    const double p_hat = report.empirical_joint;
    report.variance_ratio = p_hat * (1.0 - p_hat) / (delta * (1.0 - delta));
    report.tolerance =
        4.0 * std::sqrt(std::max(p11 * (1.0 - p11), 1e-300) / static_cast<double>(trials));
    report.pass = std::abs(report.empirical_joint - report.analytic_joint) <= report.tolerance;
    return report;
}

}  // namespace fracaug
