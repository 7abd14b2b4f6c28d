#include "fracaug/verify.hpp"

#include "fracaug/errors.hpp"
#include "fracaug/gin.hpp"
#include "fracaug/losses.hpp"
#include "fracaug/mvp.hpp"
#include "fracaug/rng.hpp"
#include "fracaug/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fracaug {

namespace {

// Random symmetric PSD matrix with eigenvalues uniform in [lo, hi]: a random
// rotation applied to a drawn diagonal.
Eigen::MatrixXd random_psd(int n, double lo, double hi, Rng& rng) {
    Eigen::MatrixXd gaussian(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) gaussian(r, c) = rng.normal();
    // Gram-Schmidt on the columns gives an orthonormal basis.
    for (int c = 0; c < n; ++c) {
        for (int k = 0; k < c; ++k)
            gaussian.col(c) -= gaussian.col(k).dot(gaussian.col(c)) * gaussian.col(k);
        gaussian.col(c).normalize();
    }
    Eigen::VectorXd eigs(n);
    for (int i = 0; i < n; ++i) eigs(i) = rng.uniform(lo, hi);
    Eigen::MatrixXd m = gaussian * eigs.asDiagonal() * gaussian.transpose();
    return 0.5 * (m + m.transpose());
}

double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace

VerifyResult verify_thm1(int matrices, int n, double spec_lo, double spec_hi, int t_max,
                         std::optional<double> alpha_override, std::uint64_t seed) {
    std::vector<double> alphas =
        alpha_override ? std::vector<double>{*alpha_override} : std::vector<double>{0.3, 0.5, 1.7};
    VerifyResult res;
    res.pass = true;
    res.report["check"] = "thm1";
    res.report["matrices"] = matrices;
    res.report["n"] = n;
    res.report["spectrum"] = {spec_lo, spec_hi};
    res.report["t_max"] = t_max;
    nlohmann::json fits = nlohmann::json::array();
    Rng root(seed);
    for (int m_idx = 0; m_idx < matrices; ++m_idx) {
        Rng rng = root.child("thm1", static_cast<std::uint64_t>(m_idx));
        const Eigen::MatrixXd m = random_psd(n, spec_lo, spec_hi, rng);
        for (double alpha : alphas) {
            const DecayFit fit = thm1_decay_check(m, alpha, t_max);
            bool non_increasing = true;
            for (std::size_t t = 1; t < fit.errors.size(); ++t)
                if (fit.errors[t] > fit.errors[t - 1] + 1e-12) non_increasing = false;
            const bool gamma_pos = fit.degenerate || fit.gamma > 0.0;
            const bool r2_ok = fit.degenerate || fit.r_squared > 0.95;
            const bool ok = non_increasing && gamma_pos && r2_ok;
            res.pass = res.pass && ok;
            nlohmann::json f;
            f["matrix"] = m_idx;
            f["alpha"] = alpha;
            f["beta"] = fit.beta;
            f["gamma"] = fit.degenerate ? 1e308 : fit.gamma;
            f["r_squared"] = fit.r_squared;
            f["non_increasing"] = non_increasing;
            f["degenerate"] = fit.degenerate;
            f["envelope_ok"] = fit.envelope_ok;
            f["final_error"] = fit.errors.back();
            f["pass"] = ok;
            fits.push_back(std::move(f));
        }
    }
    res.report["fits"] = std::move(fits);
    res.report["pass"] = res.pass;
    return res;
}

VerifyResult verify_thm2(int instances, int n_max, std::optional<double> alpha_override,
                         std::uint64_t seed) {
    VerifyResult res;
    res.pass = true;
    res.report["check"] = "thm2";
    res.report["instances"] = instances;
    double worst_gap = 0.0;
    Rng root(seed);
    for (int i = 0; i < instances; ++i) {
        Rng rng = root.child("thm2", static_cast<std::uint64_t>(i));
        const int n = 2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_max - 1)));
        const double alpha = alpha_override ? *alpha_override : rng.uniform(0.0, 3.0);
        const Eigen::MatrixXd b = random_psd(n, 0.0, 1.5, rng);
        const Thm2Report rep = thm2_identity_check(b, alpha);
        worst_gap = std::max(worst_gap, std::abs(rep.lhs - rep.rhs));
        res.pass = res.pass && rep.pass;
    }
    res.report["worst_gap"] = worst_gap;
    res.report["tolerance"] = 1e-8;
    res.report["pass"] = res.pass;
    return res;
}

VerifyResult verify_prop1(std::optional<double> delta, std::optional<double> rho, long trials,
                          std::uint64_t seed) {
    std::vector<double> deltas = delta ? std::vector<double>{*delta}
                                       : std::vector<double>{0.05, 0.1, 0.2};
    std::vector<double> rhos = rho ? std::vector<double>{*rho}
                                   : std::vector<double>{0.0, 0.25, 0.5, 1.0};
    VerifyResult res;
    res.pass = true;
    res.report["check"] = "prop1";
    res.report["trials"] = trials;
    nlohmann::json cells = nlohmann::json::array();
    int cell_idx = 0;
    for (double d : deltas) {
        for (double r : rhos) {
            const Prop1Report rep =
                prop1_simulate(d, r, trials, seed + static_cast<std::uint64_t>(cell_idx++));
            res.pass = res.pass && rep.pass;
            nlohmann::json c;
            c["delta"] = d;
            c["rho"] = r;
            c["empirical_joint"] = rep.empirical_joint;
            c["analytic_joint"] = rep.analytic_joint;
            c["reduction_factor"] = rep.reduction_factor;
            c["variance_ratio"] = rep.variance_ratio;
            c["tolerance"] = rep.tolerance;
            c["pass"] = rep.pass;
            cells.push_back(std::move(c));
        }
    }
    res.report["cells"] = std::move(cells);
    res.report["pass"] = res.pass;
    return res;
}

namespace {

// ER graph with p = 0.5 plus random features; n in [n_lo, n_hi].
void random_graph(Rng& rng, int n_lo, int n_hi, int feat_dim, Eigen::MatrixXd& adjacency,
                  Eigen::MatrixXd& features) {
    const int n = n_lo + static_cast<int>(rng.uniform_index(
                             static_cast<std::uint64_t>(n_hi - n_lo + 1)));
    adjacency = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(0.5)) adjacency(i, j) = adjacency(j, i) = 1.0;
    features.resize(n, feat_dim);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < feat_dim; ++c) features(i, c) = rng.normal();
}

double gin_loss(const GinModel& model, const Eigen::MatrixXd& adjacency,
                const Eigen::MatrixXd& features, int label, double margin, double weight,
                const Eigen::VectorXd& embed_probe) {
    const auto fwd = model.forward(adjacency, features);
    return margin_ce(fwd.logits, label, margin, weight).loss + embed_probe.dot(fwd.embedding);
}

}  // namespace

VerifyResult verify_gradcheck(std::uint64_t seed) {
    VerifyResult res;
    res.pass = true;
    res.report["check"] = "gradcheck";
    const double fd_step = 1e-5;
    const double tol = 1e-4;

    // (a) full GIN forward/backward, including the injected embedding gradient.
    double worst_gin = 0.0;
    Rng root(seed);
    for (int g = 0; g < 5; ++g) {
        Rng rng = root.child("gradcheck-gin", static_cast<std::uint64_t>(g));
        Eigen::MatrixXd adjacency, features;
        random_graph(rng, 4, 8, 3, adjacency, features);
        GinConfig cfg;
        cfg.num_layers = 2;
        cfg.hidden_dim = 16;
        cfg.input_dim = 3;
        GinModel model(cfg, rng);
        const int label = rng.bernoulli(0.5) ? 1 : 0;
        const double margin = rng.uniform(0.0, 0.5);
        const double weight = rng.uniform(0.5, 2.0);
        Eigen::VectorXd embed_probe(cfg.hidden_dim);
        for (int i = 0; i < cfg.hidden_dim; ++i) embed_probe(i) = rng.normal();

        const auto fwd = model.forward(adjacency, features);
        const MarginCeResult ce = margin_ce(fwd.logits, label, margin, weight);
        const Eigen::VectorXd analytic = model.backward(fwd, ce.grad_logits, &embed_probe);

        for (Eigen::Index i = 0; i < model.num_params(); ++i) {
            GinModel probe = model;
            probe.params()(i) = model.params()(i) + fd_step;
            const double up = gin_loss(probe, adjacency, features, label, margin, weight,
                                       embed_probe);
            probe.params()(i) = model.params()(i) - fd_step;
            const double down = gin_loss(probe, adjacency, features, label, margin, weight,
                                         embed_probe);
            const double fd = (up - down) / (2.0 * fd_step);
            worst_gin = std::max(worst_gin, rel_error(analytic(i), fd));
        }
    }
    res.report["gin_max_rel_error"] = worst_gin;
    res.pass = res.pass && worst_gin < tol;

    // (b) WDML on random 3-sample batches: gradients w.r.t. every logit and
    // both embeddings.
    double worst_wdml = 0.0;
    for (int b = 0; b < 5; ++b) {
        Rng rng = root.child("gradcheck-wdml", static_cast<std::uint64_t>(b));
        const int dim = 5;
        std::vector<WdmlSample> outputs(3), variants(3);
        std::vector<int> labels(3);
        for (int i = 0; i < 3; ++i) {
            outputs[i].logits = {rng.normal(), rng.normal()};
            variants[i].logits = {rng.normal(), rng.normal()};
            outputs[i].embedding.resize(dim);
            variants[i].embedding.resize(dim);
            for (int d = 0; d < dim; ++d) {
                outputs[i].embedding(d) = rng.normal();
                variants[i].embedding(d) = rng.normal();
            }
            labels[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
        }
        const long n0 = 2, n1 = 3;
        const WdmlResult analytic = wdml_batch(outputs, variants, labels, n0, n1);

        auto loss_at = [&](const std::vector<WdmlSample>& o,
                           const std::vector<WdmlSample>& v) {
            return wdml_batch(o, v, labels, n0, n1).loss;
        };
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 2; ++j) {
                auto up = outputs, down = outputs;
                up[i].logits[static_cast<std::size_t>(j)] += fd_step;
                down[i].logits[static_cast<std::size_t>(j)] -= fd_step;
                const double fd = (loss_at(up, variants) - loss_at(down, variants)) /
                                  (2.0 * fd_step);
                worst_wdml = std::max(
                    worst_wdml,
                    rel_error(analytic.grad_logits[static_cast<std::size_t>(i)]
                                                  [static_cast<std::size_t>(j)], fd));
            }
            for (int d = 0; d < dim; ++d) {
                {
                    auto up = outputs, down = outputs;
                    up[i].embedding(d) += fd_step;
                    down[i].embedding(d) -= fd_step;
                    const double fd = (loss_at(up, variants) - loss_at(down, variants)) /
                                      (2.0 * fd_step);
                    worst_wdml = std::max(
                        worst_wdml,
                        rel_error(analytic.grad_embedding[static_cast<std::size_t>(i)](d), fd));
                }
                {
                    auto up = variants, down = variants;
                    up[i].embedding(d) += fd_step;
                    down[i].embedding(d) -= fd_step;
                    const double fd = (loss_at(outputs, up) - loss_at(outputs, down)) /
                                      (2.0 * fd_step);
                    worst_wdml = std::max(
                        worst_wdml,
                        rel_error(analytic.grad_embedding_frac[static_cast<std::size_t>(i)](d),
                                  fd));
                }
            }
        }
    }
    res.report["wdml_max_rel_error"] = worst_wdml;
    res.pass = res.pass && worst_wdml < tol;
    res.report["tolerance"] = tol;
    res.report["pass"] = res.pass;
    return res;
}

}  // namespace fracaug
