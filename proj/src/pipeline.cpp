#include "fracaug/pipeline.hpp"

#include "fracaug/errors.hpp"
#include "fracaug/losses.hpp"
#include "fracaug/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

namespace fracaug {

namespace {

// Index-sliced parallel loop; each worker writes only its own slots, so the
// result matches the serial order exactly.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    if (jobs <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int workers = std::min<int>(jobs, static_cast<int>(count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace

std::vector<SpectralCache> build_caches(const Dataset& dataset, int k_large, int k_small,
                                        int jobs, const std::filesystem::path* cache_file) {
    std::vector<SpectralCache> caches(static_cast<std::size_t>(dataset.num_graphs()));
    const std::uint64_t hash = dataset.content_hash();
    if (cache_file && load_cache_file(*cache_file, hash, k_large, k_small, caches) &&
        caches.size() == static_cast<std::size_t>(dataset.num_graphs()))
        return caches;
    caches.assign(static_cast<std::size_t>(dataset.num_graphs()), SpectralCache{});
    parallel_for(caches.size(), jobs, [&](std::size_t i) {
        caches[i] = preprocess_graph(dataset.graphs[i].dense_adjacency(), k_large, k_small);
    });
    if (cache_file) save_cache_file(*cache_file, hash, k_large, k_small, caches);
    return caches;
}

bool RunRecord::identical_to(const RunRecord& other) const {
    if (epochs.size() != other.epochs.size()) return false;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        const auto& a = epochs[i];
        const auto& b = other.epochs[i];
        if (a.epoch != b.epoch || a.train_loss != b.train_loss || a.val_auroc != b.val_auroc ||
            a.val_auprc != b.val_auprc || a.val_f1 != b.val_f1 || a.train_size != b.train_size ||
            a.pseudo_in_view != b.pseudo_in_view)
            return false;
    }
    if (best_epoch != other.best_epoch || test_auroc != other.test_auroc ||
        test_auprc != other.test_auprc || test_f1 != other.test_f1)
        return false;
    if (best_weights.size() != other.best_weights.size()) return false;
    for (Eigen::Index i = 0; i < best_weights.size(); ++i)
        if (best_weights(i) != other.best_weights(i)) return false;
    if (ledger.entries.size() != other.ledger.entries.size()) return false;
    for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
        const auto& a = ledger.entries[i];
        const auto& b = other.ledger.entries[i];
        if (a.round != b.round || a.graph_id != b.graph_id || a.label != b.label || a.p != b.p ||
            a.p_prime != b.p_prime || a.epoch != b.epoch)
            return false;
    }
    return true;
}

namespace {

struct RunInputs {
    const Dataset* dataset;
    const SplitAssignment* split;
    std::vector<Eigen::MatrixXd> adjacency;  // dense binary, per graph
    std::vector<const Eigen::MatrixXd*> features;
};

RunInputs prepare_inputs(const Dataset& dataset, const SplitAssignment& split) {
    RunInputs in;
    in.dataset = &dataset;
    in.split = &split;
    in.adjacency.resize(static_cast<std::size_t>(dataset.num_graphs()));
    in.features.resize(static_cast<std::size_t>(dataset.num_graphs()));
    for (int i = 0; i < dataset.num_graphs(); ++i) {
        in.adjacency[static_cast<std::size_t>(i)] =
            dataset.graphs[static_cast<std::size_t>(i)].dense_adjacency();
        in.features[static_cast<std::size_t>(i)] =
            &dataset.graphs[static_cast<std::size_t>(i)].features;
    }
    return in;
}

struct ValScores {
    std::vector<double> scores;
    std::vector<int> labels;
};

// Anomaly probabilities on a set of graphs with the current weights.
std::vector<double> score_graphs(const GinModel& model, const RunInputs& in,
                                 const std::vector<int>& ids, int jobs) {
    std::vector<double> scores(ids.size(), 0.0);
    parallel_for(ids.size(), jobs, [&](std::size_t k) {
        const auto idx = static_cast<std::size_t>(ids[k]);
        scores[k] = model.forward(in.adjacency[idx], *in.features[idx]).probs[1];
    });
    return scores;
}

std::vector<double> score_variants(const GinModel& model, const RunInputs& in,
                                   const std::vector<SpectralCache>& caches,
                                   const std::vector<int>& ids, const FggParams& params,
                                   int jobs) {
    const FggMaterialized m = materialize(params);
    std::vector<double> scores(ids.size(), 0.0);
    parallel_for(ids.size(), jobs, [&](std::size_t k) {
        const auto idx = static_cast<std::size_t>(ids[k]);
        const Eigen::MatrixXd variant = fgg_generate(caches[idx], m);
        scores[k] = model.forward(variant, *in.features[idx]).probs[1];
    });
    return scores;
}

struct MetricTriple {
    double auroc_v = 0.0, auprc_v = 0.0, f1_v = 0.0;
    double sum() const { return auroc_v + auprc_v + f1_v; }
};

MetricTriple eval_metrics(const std::vector<double>& scores, const std::vector<int>& ids,
                          LabelStore& labels) {
    std::vector<int> truth(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        truth[i] = labels.get(ids[i], LabelStore::Purpose::metrics);
    MetricTriple t;
    t.auroc_v = auroc(scores, truth);
    t.auprc_v = auprc(scores, truth);
    t.f1_v = macro_f1(scores, truth);
    return t;
}

RunRecord run_loop(const Dataset& dataset, const SplitAssignment& split,
                   const GinConfig& gin_config_in, const PipelineConfig& config,
                   std::uint64_t seed, bool augment_enabled,
                   const std::filesystem::path* run_dir,
                   const std::vector<SpectralCache>* caches_in) {
    for (int id : split.train_ids)
        if (id < 0 || id >= dataset.num_graphs())
            throw contract_violation("run: split id out of range");

    RunInputs in = prepare_inputs(dataset, split);
    GinConfig gin_config = gin_config_in;
    if (gin_config.input_dim == 0) gin_config.input_dim = dataset.feature_dim();

    std::vector<int> all_labels(static_cast<std::size_t>(dataset.num_graphs()));
    for (int i = 0; i < dataset.num_graphs(); ++i)
        all_labels[static_cast<std::size_t>(i)] = dataset.graphs[static_cast<std::size_t>(i)].label;
    LabelStore labels(all_labels);

    // Spectral caches only matter for the augmentation arm.
    std::vector<SpectralCache> caches_local;
    const std::vector<SpectralCache>* caches = caches_in;
    if (augment_enabled && config.total_epochs > config.warmup_epochs && !caches) {
        caches_local = build_caches(dataset, config.k_large, config.k_small, config.jobs);
        caches = &caches_local;
    }

    const Rng root(seed);
    Rng init_rng = root.child("init");
    GinModel model(gin_config, init_rng);
    AdamState gnn_opt = AdamState::zeros(model.num_params());
    const AdamConfig gnn_opt_cfg{config.gnn_lr, 0.9, 0.999, 1e-8};

    FggParams fgg_params = FggParams::zeros(config.h_large, config.h_small);
    AdamState fgg_opt;  // sized lazily by train_fgg
    const AdamConfig fgg_opt_cfg{config.fgg_lr, 0.9, 0.999, 1e-8};

    // Base train view: ground-truth labels, fetched through the audit store.
    TrainView base_view;
    base_view.ids = split.train_ids;
    base_view.labels.reserve(split.train_ids.size());
    for (int id : split.train_ids)
        base_view.labels.push_back(labels.get(id, LabelStore::Purpose::training));

    std::vector<int> unlabeled_ids = split.val_ids;
    unlabeled_ids.insert(unlabeled_ids.end(), split.test_ids.begin(), split.test_ids.end());

    RunRecord record;
    record.seed = seed;
    record.fgg_params = fgg_params;
    record.best_weights = model.params();

    TrainView view = base_view;
    double best_sum = -1.0;
    int round = 0;
    for (int epoch = 0; epoch < config.total_epochs; ++epoch) {
        if (augment_enabled && epoch > config.warmup_epochs &&
            epoch % config.augment_every == 0) {
            // (a) freeze the GNN, fit the generator parameters against WDML
            std::vector<WdmlSample> originals(base_view.ids.size());
            for (std::size_t i = 0; i < base_view.ids.size(); ++i) {
                const auto idx = static_cast<std::size_t>(base_view.ids[i]);
                const auto fwd = model.forward(in.adjacency[idx], *in.features[idx]);
                originals[i] = {fwd.logits, fwd.embedding};
            }
            long n0 = 0, n1 = 0;
            for (int y : base_view.labels) (y == 1 ? n1 : n0) += 1;
            auto wdml_loss = [&](const FggParams& p) {
                const FggMaterialized m = materialize(p);
                std::vector<WdmlSample> variants(base_view.ids.size());
                parallel_for(base_view.ids.size(), config.jobs, [&](std::size_t i) {
                    const auto idx = static_cast<std::size_t>(base_view.ids[i]);
                    const Eigen::MatrixXd a_prime = fgg_generate((*caches)[idx], m);
                    const auto fwd = model.forward(a_prime, *in.features[idx]);
                    variants[i] = {fwd.logits, fwd.embedding};
                });
                const WdmlResult r =
                    wdml_batch(originals, variants, base_view.labels, n0, n1);
                return r.loss / static_cast<double>(base_view.ids.size());
            };
            train_fgg(fgg_params, wdml_loss, config.fgg_steps, config.fd_step, fgg_opt,
                      fgg_opt_cfg);
            record.fgg_params = fgg_params;

            // (b) fractional variants of val+test, (c) mutual verification
            round += 1;
            const auto scores = score_graphs(model, in, unlabeled_ids, config.jobs);
            const auto scores_frac =
                score_variants(model, in, *caches, unlabeled_ids, fgg_params, config.jobs);
            MvpConfig mvp_cfg{config.tau_normal, config.tau_anomalous};
            view = expand_training_set(base_view, unlabeled_ids, scores, scores_frac, mvp_cfg,
                                       round, epoch, record.ledger);
        }

        // (d) one training epoch on the current view
        long n0 = 0, n1 = 0;
        for (int y : view.labels) (y == 1 ? n1 : n0) += 1;
        std::vector<const Eigen::MatrixXd*> adj_ptr(view.ids.size());
        std::vector<const Eigen::MatrixXd*> feat_ptr(view.ids.size());
        for (std::size_t i = 0; i < view.ids.size(); ++i) {
            const auto idx = static_cast<std::size_t>(view.ids[i]);
            adj_ptr[i] = &in.adjacency[idx];
            feat_ptr[i] = in.features[idx];
        }
        Rng shuffle_rng = root.child("shuffle", static_cast<std::uint64_t>(epoch));
        const double loss = train_epoch(model, gnn_opt, gnn_opt_cfg, adj_ptr, feat_ptr,
                                        view.labels, n0, n1, shuffle_rng);

        EpochRecord er;
        er.epoch = epoch;
        er.train_loss = loss;
        er.train_size = static_cast<long>(view.ids.size());
        er.pseudo_in_view = static_cast<long>(view.ids.size() - base_view.ids.size());
        const auto val_scores = score_graphs(model, in, split.val_ids, config.jobs);
        const MetricTriple val = eval_metrics(val_scores, split.val_ids, labels);
        er.val_auroc = val.auroc_v;
        er.val_auprc = val.auprc_v;
        er.val_f1 = val.f1_v;
        record.epochs.push_back(er);

        if (val.sum() > best_sum) {
            best_sum = val.sum();
            record.best_epoch = epoch;
            record.best_weights = model.params();
        }
    }

    // Final evaluation with the selected checkpoint.
    GinModel best = model;
    best.params() = record.best_weights;
    const auto test_scores = score_graphs(best, in, split.test_ids, config.jobs);
    const MetricTriple test = eval_metrics(test_scores, split.test_ids, labels);
    record.test_auroc = test.auroc_v;
    record.test_auprc = test.auprc_v;
    record.test_f1 = test.f1_v;
    record.label_training_reads = labels.training_reads();
    record.label_metric_reads = labels.metric_reads();

    if (run_dir) {
        write_run_dir(*run_dir, record, gin_config);
        GinCheckpoint ckpt;
        ckpt.model = best;
        ckpt.opt_state = gnn_opt;
        ckpt.root_seed = seed;
        ckpt.epoch = record.best_epoch;
        ckpt.save(*run_dir / "model.ckpt");
    }
    return record;
}

}  // namespace

RunRecord run_fracaug(const Dataset& dataset, const SplitAssignment& split,
                      const GinConfig& gin_config, const PipelineConfig& config,
                      std::uint64_t seed, const std::filesystem::path* run_dir,
                      const std::vector<SpectralCache>* caches) {
    if (config.augment_every < 1 || config.fgg_steps < 1)
        throw contract_violation("run_fracaug: e_aug and e_FGG must be >= 1");
    return run_loop(dataset, split, gin_config, config, seed, /*augment_enabled=*/true, run_dir,
                    caches);
}

RunRecord run_vanilla(const Dataset& dataset, const SplitAssignment& split,
                      const GinConfig& gin_config, int epochs, std::uint64_t seed,
                      const std::filesystem::path* run_dir) {
    PipelineConfig config;
    config.total_epochs = epochs;
    config.warmup_epochs = epochs;  // never augment
    return run_loop(dataset, split, gin_config, config, seed, /*augment_enabled=*/false, run_dir,
                    nullptr);
}

void write_run_dir(const std::filesystem::path& dir, const RunRecord& record,
                   const GinConfig& gin_config) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "epochs.jsonl");
        if (!out) throw format_error("cannot write " + (dir / "epochs.jsonl").string());
        for (const auto& e : record.epochs) {
            nlohmann::json rec;
            rec["epoch"] = e.epoch;
            rec["train_loss"] = e.train_loss;
            rec["val_auroc"] = e.val_auroc;
            rec["val_auprc"] = e.val_auprc;
            rec["val_f1"] = e.val_f1;
            rec["train_size"] = e.train_size;
            rec["pseudo_in_view"] = e.pseudo_in_view;
            out << rec.dump() << "\n";
        }
    }
    record.ledger.save_jsonl(dir / "ledger.jsonl");
    save_fgg_params(dir / "fgg_params.json", record.fgg_params);
    {
        nlohmann::json rep;
        rep["seed"] = record.seed;
        rep["best_epoch"] = record.best_epoch;
        rep["test_auroc"] = record.test_auroc;
        rep["test_auprc"] = record.test_auprc;
        rep["test_f1"] = record.test_f1;
        rep["epochs_run"] = record.epochs.size();
        rep["gin"] = {{"num_layers", gin_config.num_layers},
                      {"hidden_dim", gin_config.hidden_dim},
                      {"input_dim", gin_config.input_dim},
                      {"readout", gin_config.readout == Readout::mean ? "mean" : "sum"},
                      {"epsilon", gin_config.epsilon}};
        std::ofstream out(dir / "report.json");
        if (!out) throw format_error("cannot write " + (dir / "report.json").string());
        out << rep.dump(2) << "\n";
    }
}

}  // namespace fracaug
