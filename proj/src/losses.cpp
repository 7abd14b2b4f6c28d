#include "fracaug/losses.hpp"

#include "fracaug/errors.hpp"

#include <cmath>
#include <iostream>

namespace fracaug {

MarginCeResult margin_ce(const std::array<double, 2>& logits, int label, double margin,
                         double weight) {
    if (!(weight > 0.0)) throw contract_violation("margin_ce: weight must be positive");
    if (!std::isfinite(margin)) throw contract_violation("margin_ce: margin must be finite");
    if (label != 0 && label != 1) throw contract_violation("margin_ce: label must be 0 or 1");

    const int other = 1 - label;
    // loss = weight * log(1 + exp(z)), z = s_other - s_label + m.
    const double z = logits[static_cast<std::size_t>(other)] -
                     logits[static_cast<std::size_t>(label)] + margin;
    MarginCeResult res;
    if (z > 0.0)
        res.loss = weight * (z + std::log1p(std::exp(-z)));
    else
        res.loss = weight * std::log1p(std::exp(z));
    const double sig = z > 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    res.grad_logits[static_cast<std::size_t>(label)] = -weight * sig;
    res.grad_logits[static_cast<std::size_t>(other)] = weight * sig;
    res.grad_margin = weight * sig;
    return res;
}

double distance_margin(const Eigen::VectorXd& o, const Eigen::VectorXd& o_prime) {
    const double norm_a = o.norm();
    const double norm_b = o_prime.norm();
    if (norm_a == 0.0 && norm_b == 0.0) {
        static bool warned = false;
        if (!warned) {
            std::cerr << "warning: distance_margin on two zero embeddings, margin := 0\n";
            warned = true;
        }
        return 0.0;
    }
    if (norm_a == 0.0 || norm_b == 0.0) return 0.5;  // cosine taken as 0
    const double cosine = o.dot(o_prime) / (norm_a * norm_b);
    return (1.0 - std::clamp(cosine, -1.0, 1.0)) / 2.0;
}

void distance_margin_backward(const Eigen::VectorXd& o, const Eigen::VectorXd& o_prime,
                              double upstream, Eigen::VectorXd& grad_o,
                              Eigen::VectorXd& grad_o_prime) {
    grad_o = Eigen::VectorXd::Zero(o.size());
    grad_o_prime = Eigen::VectorXd::Zero(o_prime.size());
    const double norm_a = o.norm();
    const double norm_b = o_prime.norm();
    if (norm_a == 0.0 || norm_b == 0.0) return;
    const double inv = 1.0 / (norm_a * norm_b);
    const double cosine = o.dot(o_prime) * inv;
    // m = (1 - cos)/2 -> dm/do = -(1/2) dcos/do.
    grad_o = -0.5 * upstream * (o_prime * inv - cosine / (norm_a * norm_a) * o);
    grad_o_prime = -0.5 * upstream * (o * inv - cosine / (norm_b * norm_b) * o_prime);
}

WdmlResult wdml_batch(const std::vector<WdmlSample>& outputs,
                      const std::vector<WdmlSample>& outputs_frac,
                      const std::vector<int>& labels, long n_class0, long n_class1) {
    if (outputs.size() != outputs_frac.size() || outputs.size() != labels.size())
        throw contract_violation("wdml_batch: input lists are not aligned");
    if (n_class0 < 1 || n_class1 < 1)
        throw config_error("wdml_batch: both classes must be present in the training set");

    WdmlResult res;
    res.grad_logits.resize(outputs.size(), {0.0, 0.0});
    res.grad_embedding.resize(outputs.size());
    res.grad_embedding_frac.resize(outputs.size());
    res.margins.resize(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const int y = labels[i];
        const double weight = 1.0 / static_cast<double>(y == 1 ? n_class1 : n_class0);
        const double m = distance_margin(outputs[i].embedding, outputs_frac[i].embedding);
        res.margins[i] = m;
        const MarginCeResult ce = margin_ce(outputs[i].logits, y, m, weight);
        res.loss += ce.loss;
        res.grad_logits[i] = ce.grad_logits;
        distance_margin_backward(outputs[i].embedding, outputs_frac[i].embedding, ce.grad_margin,
                                 res.grad_embedding[i], res.grad_embedding_frac[i]);
    }
    return res;
}

std::array<double, 2> ldam_margins(long n_class0, long n_class1, double scale) {
    if (n_class0 < 1 || n_class1 < 1) throw contract_violation("ldam_margins: counts must be >= 1");
    if (!(scale > 0.0)) throw contract_violation("ldam_margins: scale must be positive");
    return {scale / std::pow(static_cast<double>(n_class0), 0.25),
            scale / std::pow(static_cast<double>(n_class1), 0.25)};
}

}  // namespace fracaug
