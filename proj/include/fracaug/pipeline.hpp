#pragma once

#include "fracaug/fgg.hpp"
#include "fracaug/gin.hpp"
#include "fracaug/graph.hpp"
#include "fracaug/mvp.hpp"
#include "fracaug/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace fracaug {

struct PipelineConfig {
    int k_large = 3;
    int k_small = 3;
    int h_large = 3;
    int h_small = 3;
    int warmup_epochs = 25;   // e_warmup
    int augment_every = 25;   // e_aug
    int fgg_steps = 10;       // e_FGG
    int total_epochs = 200;   // e_f
    double tau_normal = 0.05;
    double tau_anomalous = 0.95;
    double gnn_lr = 1e-3;
    double fgg_lr = 1e-2;
    double fd_step = 1e-3;
    int jobs = 1;  // parallel cache building and scoring; results match serial
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_auroc = 0.0;
    double val_auprc = 0.0;
    double val_f1 = 0.0;
    long train_size = 0;
    long pseudo_in_view = 0;  // pseudo-labeled graphs in the current train view
};

// Ground-truth labels behind an access log, so a run can prove that val/test
// labels feed nothing but the metric computations.
class LabelStore {
public:
    enum class Purpose { training, metrics };

    explicit LabelStore(std::vector<int> labels)
        : labels_(std::move(labels)),
          training_reads_(labels_.size(), 0),
          metric_reads_(labels_.size(), 0) {}

    int get(int id, Purpose purpose) {
        auto idx = static_cast<std::size_t>(id);
        (purpose == Purpose::training ? training_reads_ : metric_reads_)[idx] += 1;
        return labels_[idx];
    }

    const std::vector<long>& training_reads() const { return training_reads_; }
    const std::vector<long>& metric_reads() const { return metric_reads_; }

private:
    std::vector<int> labels_;
    std::vector<long> training_reads_;
    std::vector<long> metric_reads_;
};

struct RunRecord {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;  // -1 means the untrained model was selected
    double test_auroc = 0.0;
    double test_auprc = 0.0;
    double test_f1 = 0.0;
    FggParams fgg_params;
    PseudoLabelLedger ledger;
    Eigen::VectorXd best_weights;
    std::uint64_t seed = 0;
    std::vector<long> label_training_reads;  // per graph id
    std::vector<long> label_metric_reads;

    bool identical_to(const RunRecord& other) const;
};

// Caches for every graph at (k_l, k_s); parallel over graphs when jobs > 1,
// bit-identical to the serial order. When cache_file is given, a matching
// sidecar is reused and a fresh build is persisted.
std::vector<SpectralCache> build_caches(const Dataset& dataset, int k_large, int k_small,
                                        int jobs,
                                        const std::filesystem::path* cache_file = nullptr);

// The full training loop: warmup on the labeled split, then periodic rounds
// of (FGG training via WDML with the GNN frozen) -> (fractional variants of
// val+test) -> (mutual-verification expansion) -> continued training on the
// expanded view. Model selection maximizes summed val AUROC+AUPRC+F1; test
// metrics come from the selected checkpoint.
RunRecord run_fracaug(const Dataset& dataset, const SplitAssignment& split,
                      const GinConfig& gin_config, const PipelineConfig& config,
                      std::uint64_t seed,
                      const std::filesystem::path* run_dir = nullptr,
                      const std::vector<SpectralCache>* caches = nullptr);

// Weighted-CE GIN only, same selection rule; the comparison arm.
RunRecord run_vanilla(const Dataset& dataset, const SplitAssignment& split,
                      const GinConfig& gin_config, int epochs, std::uint64_t seed,
                      const std::filesystem::path* run_dir = nullptr);

void write_run_dir(const std::filesystem::path& dir, const RunRecord& record,
                   const GinConfig& gin_config);

}  // namespace fracaug
