#include "fracaug/errors.hpp"
#include "fracaug/fgg.hpp"
#include "fracaug/gin.hpp"
#include "fracaug/graph.hpp"
#include "fracaug/losses.hpp"
#include "fracaug/metrics.hpp"
#include "fracaug/mvp.hpp"
#include "fracaug/pipeline.hpp"
#include "fracaug/spectral.hpp"
#include "fracaug/synthetic.hpp"
#include "fracaug/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fracaug;

namespace {

FggParams params_from_thetas(const Eigen::VectorXd& theta_alpha_l,
                             const Eigen::VectorXd& theta_omega_l,
                             const Eigen::VectorXd& theta_alpha_s,
                             const Eigen::VectorXd& theta_omega_s, double theta_mix) {
    FggParams p;
    p.theta_alpha_large = theta_alpha_l;
    p.theta_omega_large = theta_omega_l;
    p.theta_alpha_small = theta_alpha_s;
    p.theta_omega_small = theta_omega_s;
    p.theta_mix = theta_mix;
    return p;
}

Dataset dataset_from_graphs(const std::vector<Eigen::MatrixXd>& adjacencies,
                            const std::vector<Eigen::MatrixXd>& features,
                            const std::vector<int>& labels) {
    Dataset ds;
    ds.name = "python";
    for (std::size_t i = 0; i < adjacencies.size(); ++i) {
        Graph g;
        g.id = static_cast<int>(i);
        g.num_nodes = static_cast<int>(adjacencies[i].rows());
        for (int r = 0; r < g.num_nodes; ++r)
            for (int c = r + 1; c < g.num_nodes; ++c)
                if (adjacencies[i](r, c) != 0.0) g.edges.emplace_back(r, c);
        g.features = features[i];
        g.label = labels[i];
        ds.graphs.push_back(std::move(g));
    }
    ds.recount_classes();
    return ds;
}

py::dict run_record_to_dict(const RunRecord& rec) {
    py::dict d;
    d["test_auroc"] = rec.test_auroc;
    d["test_auprc"] = rec.test_auprc;
    d["test_f1"] = rec.test_f1;
    d["best_epoch"] = rec.best_epoch;
    d["epochs_run"] = rec.epochs.size();
    d["pseudo_labels"] = rec.ledger.entries.size();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "FracAug core: spectral fractional-power graph augmentation";

    py::register_exception<Error>(m, "FracaugError");

    // spectral
    m.def("normalize_adjacency", &normalize_adjacency, py::arg("adjacency"));
    m.def("hat_transform", &hat_transform, py::arg("normalized"));
    m.def(
        "sym_evd",
        [](const Eigen::MatrixXd& mat) {
            const SymEvd evd = sym_evd(mat);
            return py::make_tuple(evd.values, evd.vectors);
        },
        py::arg("matrix"), "Eigenvalues (descending) and orthonormal eigenvectors.");
    m.def(
        "fractional_power",
        [](const Eigen::MatrixXd& mat, double alpha) {
            return fractional_power(sym_evd(mat), alpha);
        },
        py::arg("matrix"), py::arg("alpha"),
        "M^alpha of a symmetric PSD matrix via its full eigendecomposition.");
    m.def(
        "chebyshev_coeffs",
        [](double alpha, double lo, double hi, int degree) {
            return chebyshev_coeffs(alpha, lo, hi, degree).coeffs;
        },
        py::arg("alpha"), py::arg("lo"), py::arg("hi"), py::arg("degree"));
    m.def(
        "chebyshev_apply",
        [](double alpha, double lo, double hi, int degree, const Eigen::MatrixXd& mat) {
            return chebyshev_apply(chebyshev_coeffs(alpha, lo, hi, degree), mat);
        },
        py::arg("alpha"), py::arg("lo"), py::arg("hi"), py::arg("degree"), py::arg("matrix"));
    m.def(
        "thm1_decay_errors",
        [](const Eigen::MatrixXd& mat, double alpha, int t_max) {
            const DecayFit fit = thm1_decay_check(mat, alpha, t_max);
            py::dict d;
            d["errors"] = fit.errors;
            d["beta"] = fit.beta;
            d["gamma"] = fit.gamma;
            d["r_squared"] = fit.r_squared;
            d["degenerate"] = fit.degenerate;
            return d;
        },
        py::arg("matrix"), py::arg("alpha"), py::arg("t_max"));
    m.def(
        "thm2_identity",
        [](const Eigen::MatrixXd& mat, double alpha) {
            const Thm2Report rep = thm2_identity_check(mat, alpha);
            return py::make_tuple(rep.lhs, rep.rhs, rep.pass);
        },
        py::arg("matrix"), py::arg("alpha"));

    // fgg
    py::class_<SpectralCache>(m, "SpectralCache")
        .def_readonly("u_large", &SpectralCache::u_large)
        .def_readonly("lambda_large", &SpectralCache::lambda_large)
        .def_readonly("u_small", &SpectralCache::u_small)
        .def_readonly("lambda_small", &SpectralCache::lambda_small);
    m.def("preprocess_graph", &preprocess_graph, py::arg("adjacency"), py::arg("k_large"),
          py::arg("k_small"),
          "hat-transform of the normalized adjacency, EVD, truncation to (k_l, k_s).");
    m.def(
        "fgg_generate",
        [](const SpectralCache& cache, const Eigen::VectorXd& ta_l, const Eigen::VectorXd& to_l,
           const Eigen::VectorXd& ta_s, const Eigen::VectorXd& to_s, double t_mix) {
            return fgg_generate(cache, params_from_thetas(ta_l, to_l, ta_s, to_s, t_mix));
        },
        py::arg("cache"), py::arg("theta_alpha_l"), py::arg("theta_omega_l"),
        py::arg("theta_alpha_s"), py::arg("theta_omega_s"), py::arg("theta_mix"));
    m.def(
        "fgg_materialize",
        [](const Eigen::VectorXd& ta_l, const Eigen::VectorXd& to_l, const Eigen::VectorXd& ta_s,
           const Eigen::VectorXd& to_s, double t_mix) {
            const FggMaterialized mt =
                materialize(params_from_thetas(ta_l, to_l, ta_s, to_s, t_mix));
            py::dict d;
            d["alpha_l"] = mt.alpha_large;
            d["omega_l"] = mt.omega_large;
            d["alpha_s"] = mt.alpha_small;
            d["omega_s"] = mt.omega_small;
            d["omega"] = mt.mix;
            return d;
        },
        py::arg("theta_alpha_l"), py::arg("theta_omega_l"), py::arg("theta_alpha_s"),
        py::arg("theta_omega_s"), py::arg("theta_mix"));

    // losses
    m.def(
        "margin_ce",
        [](double s0, double s1, int label, double margin, double weight) {
            const MarginCeResult r = margin_ce({s0, s1}, label, margin, weight);
            return py::make_tuple(r.loss, r.grad_logits[0], r.grad_logits[1]);
        },
        py::arg("s0"), py::arg("s1"), py::arg("label"), py::arg("margin"), py::arg("weight"));
    m.def("distance_margin", &distance_margin, py::arg("o"), py::arg("o_prime"));
    m.def(
        "wdml_loss",
        [](const Eigen::MatrixXd& logits, const Eigen::MatrixXd& emb,
           const Eigen::MatrixXd& emb_frac, const std::vector<int>& labels, long n0, long n1) {
            std::vector<WdmlSample> outputs(labels.size()), variants(labels.size());
            for (std::size_t i = 0; i < labels.size(); ++i) {
                const auto r = static_cast<Eigen::Index>(i);
                outputs[i].logits = {logits(r, 0), logits(r, 1)};
                outputs[i].embedding = emb.row(r).transpose();
                variants[i].logits = {0.0, 0.0};
                variants[i].embedding = emb_frac.row(r).transpose();
            }
            return wdml_batch(outputs, variants, labels, n0, n1).loss;
        },
        py::arg("logits"), py::arg("embeddings"), py::arg("embeddings_frac"), py::arg("labels"),
        py::arg("n_class0"), py::arg("n_class1"));
    m.def(
        "ldam_margins",
        [](long n0, long n1, double scale) {
            const auto margins = ldam_margins(n0, n1, scale);
            return py::make_tuple(margins[0], margins[1]);
        },
        py::arg("n_class0"), py::arg("n_class1"), py::arg("scale") = 0.5);

    // metrics
    m.def("auroc", &auroc, py::arg("scores"), py::arg("labels"));
    m.def("auprc", &auprc, py::arg("scores"), py::arg("labels"));
    m.def("macro_f1", &macro_f1, py::arg("scores"), py::arg("labels"),
          py::arg("threshold") = 0.5);

    // mvp
    m.def(
        "pseudo_label",
        [](double p, double p_prime, double tau_n, double tau_a) -> py::object {
            const auto label = pseudo_label(p, p_prime, MvpConfig{tau_n, tau_a});
            if (!label) return py::none();
            return py::int_(*label);
        },
        py::arg("p"), py::arg("p_prime"), py::arg("tau_n") = 0.05, py::arg("tau_a") = 0.95);
    m.def(
        "prop1_simulate",
        [](double delta, double rho, long trials, std::uint64_t seed) {
            const Prop1Report rep = prop1_simulate(delta, rho, trials, seed);
            py::dict d;
            d["empirical_joint"] = rep.empirical_joint;
            d["analytic_joint"] = rep.analytic_joint;
            d["reduction_factor"] = rep.reduction_factor;
            d["variance_ratio"] = rep.variance_ratio;
            d["tolerance"] = rep.tolerance;
            d["pass"] = rep.pass;
            return d;
        },
        py::arg("delta"), py::arg("rho"), py::arg("trials") = 1000000, py::arg("seed") = 1);

    // synthetic benchmark + end-to-end runs
    m.def(
        "synthetic_benchmark",
        [](int num_graphs, double anomaly_ratio, std::uint64_t seed) {
            SyntheticConfig cfg;
            cfg.num_graphs = num_graphs;
            cfg.anomaly_ratio = anomaly_ratio;
            const Dataset ds = make_synthetic_benchmark(cfg, seed);
            py::list out;
            for (const auto& g : ds.graphs)
                out.append(py::make_tuple(g.dense_adjacency(), g.features, g.label));
            return out;
        },
        py::arg("num_graphs") = 200, py::arg("anomaly_ratio") = 0.1, py::arg("seed") = 7);
    m.def(
        "run_vanilla",
        [](const std::vector<Eigen::MatrixXd>& adjacencies,
           const std::vector<Eigen::MatrixXd>& features, const std::vector<int>& labels,
           int epochs, std::uint64_t seed, int hidden_dim, double train_fraction,
           double val_fraction) {
            const Dataset ds = dataset_from_graphs(adjacencies, features, labels);
            const auto split = stratified_split(ds, train_fraction, val_fraction, seed);
            GinConfig gin;
            gin.hidden_dim = hidden_dim;
            gin.input_dim = ds.feature_dim();
            return run_record_to_dict(run_vanilla(ds, split, gin, epochs, seed));
        },
        py::arg("adjacencies"), py::arg("features"), py::arg("labels"), py::arg("epochs") = 30,
        py::arg("seed") = 1, py::arg("hidden_dim") = 32, py::arg("train_fraction") = 0.05,
        py::arg("val_fraction") = 0.05);
    m.def(
        "run_fracaug",
        [](const std::vector<Eigen::MatrixXd>& adjacencies,
           const std::vector<Eigen::MatrixXd>& features, const std::vector<int>& labels,
           int epochs, int warmup, int augment_every, std::uint64_t seed, int hidden_dim,
           double train_fraction, double val_fraction) {
            const Dataset ds = dataset_from_graphs(adjacencies, features, labels);
            const auto split = stratified_split(ds, train_fraction, val_fraction, seed);
            GinConfig gin;
            gin.hidden_dim = hidden_dim;
            gin.input_dim = ds.feature_dim();
            PipelineConfig pipe;
            pipe.total_epochs = epochs;
            pipe.warmup_epochs = warmup;
            pipe.augment_every = augment_every;
            return run_record_to_dict(run_fracaug(ds, split, gin, pipe, seed));
        },
        py::arg("adjacencies"), py::arg("features"), py::arg("labels"), py::arg("epochs") = 60,
        py::arg("warmup") = 20, py::arg("augment_every") = 10, py::arg("seed") = 1,
        py::arg("hidden_dim") = 32, py::arg("train_fraction") = 0.05,
        py::arg("val_fraction") = 0.05);

    // verification suites
    m.def(
        "verify",
        [](const std::string& target, std::uint64_t seed) {
            VerifyResult r;
            if (target == "thm1")
                r = verify_thm1(10, 16, 0.1, 1.0, 20, std::nullopt, seed);
            else if (target == "thm2")
                r = verify_thm2(100, 16, std::nullopt, seed);
            else if (target == "prop1")
                r = verify_prop1(std::nullopt, std::nullopt, 100000, seed);
            else if (target == "gradcheck")
                r = verify_gradcheck(seed);
            else
                throw domain_error("unknown verify target " + target);
            return py::make_tuple(r.pass, r.report.dump());
        },
        py::arg("target"), py::arg("seed") = 1);

    m.attr("__version__") = "0.1.0";
}
