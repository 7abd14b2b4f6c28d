#pragma once

#include "fracaug/graph.hpp"

#include <cstdint>

namespace fracaug {

// Built-in benchmark: two structural families under controllable imbalance.
// Normal graphs are two-community graphs (dense blocks, sparse cross links);
// anomalous graphs are near-regular ring lattices with lightly rewired
// chords. Node features carry a constant channel plus Gaussian noise, so the
// discriminative signal is structural.
struct SyntheticConfig {
    int num_graphs = 2000;
    double anomaly_ratio = 0.08;
    int min_nodes = 15;
    int max_nodes = 30;
    double p_intra = 0.5;       // within-community edge probability
    double p_inter = 0.04;      // cross-community edge probability
    int lattice_degree = 6;     // near-regular family: neighbors per node
    double rewire_prob = 0.1;   // fraction of lattice edges rewired
    int feature_dim = 4;        // column 0 is all-ones, the rest noise
    double feature_noise = 1.0;
};

Dataset make_synthetic_benchmark(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace fracaug
