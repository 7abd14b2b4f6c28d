#pragma once

#include "fracaug/optim.hpp"
#include "fracaug/rng.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <vector>

namespace fracaug {

enum class Readout { mean, sum };

struct GinConfig {
    int num_layers = 2;
    int hidden_dim = 64;
    int input_dim = 0;
    Readout readout = Readout::mean;
    double epsilon = 0.0;  // the (1 + eps) self-weight, fixed
};

// Minimal GIN classifier with explicit forward/backward. Each layer is
// MLP_l((1+eps) h + W h) with MLP = affine-ReLU-affine-ReLU; the graph
// embedding o is the node readout of the last layer and feeds a 2-logit
// linear head. All weights live in one flat vector so the optimizer and
// checkpointing stay trivial.
class GinModel {
public:
    GinModel() = default;
    GinModel(const GinConfig& config, Rng& rng);

    const GinConfig& config() const { return config_; }
    Eigen::Index num_params() const { return params_.size(); }
    const Eigen::VectorXd& params() const { return params_; }
    Eigen::VectorXd& params() { return params_; }

    struct Forward {
        std::array<double, 2> logits{0.0, 0.0};
        std::array<double, 2> probs{0.0, 0.0};
        Eigen::VectorXd embedding;  // o

        // retained activations for backward
        std::vector<Eigen::MatrixXd> layer_input;   // (1+eps) h + W h, per layer
        std::vector<Eigen::MatrixXd> pre_act1;      // first affine output
        std::vector<Eigen::MatrixXd> hidden_mid;    // relu of pre_act1
        std::vector<Eigen::MatrixXd> pre_act2;      // second affine output
        std::vector<Eigen::MatrixXd> hidden_out;    // relu of pre_act2 (= next h)
        Eigen::MatrixXd node_features;              // h^0
        Eigen::MatrixXd adjacency;                  // the W actually used
    };

    // adjacency may be binary (original graphs) or a dense generated A'.
    Forward forward(const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& features) const;

    // Exact reverse-mode gradient of the scalar loss whose partials w.r.t. the
    // logits (and optionally the embedding) are supplied.
    Eigen::VectorXd backward(const Forward& state, const std::array<double, 2>& grad_logits,
                             const Eigen::VectorXd* grad_embedding = nullptr) const;

private:
    struct Layout {
        Eigen::Index w1, b1, w2, b2;  // offsets per layer (w1 is d_in x d_h, ...)
    };

    Eigen::Index offset_classifier_w() const;
    Eigen::Index offset_classifier_b() const;
    Eigen::Index layer_input_dim(int layer) const;

    GinConfig config_;
    Eigen::VectorXd params_;
    std::vector<Layout> layout_;

    friend struct GinCheckpoint;
};

// One pass over the training view in a seeded shuffled order, per-graph Adam
// updates with class-weighted cross-entropy (weight 1/N_y). Returns the mean
// per-sample loss.
double train_epoch(GinModel& model, AdamState& opt_state, const AdamConfig& opt_config,
                   const std::vector<const Eigen::MatrixXd*>& adjacencies,
                   const std::vector<const Eigen::MatrixXd*>& features,
                   const std::vector<int>& labels, long n_class0, long n_class1, Rng& shuffle_rng);

// Versioned JSON checkpoint: config, weights, optimizer state, RNG root seed
// and epoch counter. Numbers round-trip at full double precision.
struct GinCheckpoint {
    GinModel model;
    AdamState opt_state;
    std::uint64_t root_seed = 0;
    long epoch = 0;

    void save(const std::filesystem::path& file) const;
    static GinCheckpoint load(const std::filesystem::path& file);
};

}  // namespace fracaug
