#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

namespace fracaug {

enum class MarginKind { softmax, lmcl, ldam, wdml };

struct MarginSpec {
    MarginKind kind = MarginKind::wdml;
    double fixed_margin = 0.35;  // lmcl
    double ldam_scale = 0.5;     // m_c = ldam_scale / N_c^{1/4}
};

struct MarginCeResult {
    double loss = 0.0;
    std::array<double, 2> grad_logits{0.0, 0.0};
    double grad_margin = 0.0;  // dL/dm, needed to chain into the embeddings
};

// Margined binary cross-entropy:
//   loss = -weight * log(exp(s_y - m) / (exp(s_y - m) + exp(s_{1-y})))
// stabilized against overflow. Gradient is analytic.
MarginCeResult margin_ce(const std::array<double, 2>& logits, int label, double margin,
                         double weight);

// m = (1 - cos(o, o')) / 2, in [0, 1]. Both vectors zero degenerates to 0
// (with a warning the first time); a single zero vector yields 0.5.
double distance_margin(const Eigen::VectorXd& o, const Eigen::VectorXd& o_prime);

// Gradient of distance_margin with respect to both embeddings. Zero for the
// degenerate zero-norm cases.
void distance_margin_backward(const Eigen::VectorXd& o, const Eigen::VectorXd& o_prime,
                              double upstream, Eigen::VectorXd& grad_o,
                              Eigen::VectorXd& grad_o_prime);

struct WdmlSample {
    std::array<double, 2> logits{0.0, 0.0};  // s of the original graph
    Eigen::VectorXd embedding;               // o
};

struct WdmlResult {
    double loss = 0.0;                                    // weighted sum, not mean
    std::vector<std::array<double, 2>> grad_logits;       // per sample, w.r.t. s_i
    std::vector<Eigen::VectorXd> grad_embedding;          // w.r.t. o_i
    std::vector<Eigen::VectorXd> grad_embedding_frac;     // w.r.t. o'_i
    std::vector<double> margins;                          // m_i per sample
};

// L_WDML = -sum_i (1/N_{y_i}) log(...margin m_i...). The per-sample margin is
// distance_margin(o_i, o'_i); the fractional logits take part in nothing but
// are carried by callers for pseudo-labeling.
WdmlResult wdml_batch(const std::vector<WdmlSample>& outputs,
                      const std::vector<WdmlSample>& outputs_frac,
                      const std::vector<int>& labels, long n_class0, long n_class1);

// LDAM-style class margins, m_c = scale / N_c^{1/4}.
std::array<double, 2> ldam_margins(long n_class0, long n_class1, double scale);

}  // namespace fracaug
