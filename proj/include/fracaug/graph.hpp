#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fracaug {

// Undirected graph, stored as the deduplicated upper-triangular edge list
// (i < j, 0-based) plus a dense node-feature matrix. Adjacency is binary with
// zero diagonal; self-loops enter only later through the h(.) transform.
struct Graph {
    int id = 0;
    int num_nodes = 0;
    std::vector<std::pair<int, int>> edges;  // i < j, sorted, unique
    Eigen::MatrixXd features;                // num_nodes x F
    int label = 0;                           // 0 = normal, 1 = anomalous

    int num_edges() const { return static_cast<int>(edges.size()); }

    // Dense symmetric 0/1 adjacency with zero diagonal.
    Eigen::MatrixXd dense_adjacency() const;

    std::vector<double> degrees() const;
};

struct Dataset {
    std::string name;
    std::vector<Graph> graphs;
    long class_counts[2] = {0, 0};  // (N_0, N_1)

    int num_graphs() const { return static_cast<int>(graphs.size()); }
    int feature_dim() const { return graphs.empty() ? 0 : static_cast<int>(graphs.front().features.cols()); }

    void recount_classes();

    // FNV-1a over a canonical serialization of structure, features and labels.
    // Used to key spectral cache sidecars.
    std::uint64_t content_hash() const;
};

struct SplitAssignment {
    std::vector<int> train_ids;
    std::vector<int> val_ids;
    std::vector<int> test_ids;
    std::uint64_t seed = 0;
};

// Reads a TUDataset-format directory: {name}_A.txt, {name}_graph_indicator.txt,
// {name}_graph_labels.txt and at least one of {name}_node_labels.txt /
// {name}_node_attributes.txt. Node labels are expanded to one-hot features and
// concatenated with raw attributes when both files exist. Graph labels are
// remapped so the minority class becomes 1. Duplicate edges are collapsed;
// listed self-loops are dropped with a warning on stderr.
Dataset load_tudataset(const std::filesystem::path& directory, const std::string& name);

// Writes the dataset back out in the same text format (both edge directions
// listed, features emitted as node attributes at full double precision).
// load_tudataset on the result reproduces adjacency, features and labels.
void save_tudataset(const Dataset& dataset, const std::filesystem::path& directory,
                    const std::string& name);

// Per-class shuffled split: each class contributes ceil(f * count) graphs
// (at least 1) to train and to val, the remainder to test. Deterministic in
// (dataset order, fractions, seed). A class with fewer than 3 members makes
// the split infeasible.
SplitAssignment stratified_split(const Dataset& dataset, double train_fraction,
                                 double val_fraction, std::uint64_t seed);

}  // namespace fracaug
