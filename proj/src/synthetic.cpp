#include "fracaug/synthetic.hpp"

#include "fracaug/errors.hpp"
#include "fracaug/rng.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace fracaug {

namespace {

Graph make_community_graph(int id, int n, const SyntheticConfig& cfg, Rng& rng) {
    Graph g;
    g.id = id;
    g.num_nodes = n;
    g.label = 0;
    const int half = n / 2;
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool same = (i < half) == (j < half);
            if (rng.bernoulli(same ? cfg.p_intra : cfg.p_inter)) edges.emplace(i, j);
        }
    }
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

Graph make_near_regular_graph(int id, int n, const SyntheticConfig& cfg, Rng& rng) {
    Graph g;
    g.id = id;
    g.num_nodes = n;
    g.label = 1;
    const int k = std::min(cfg.lattice_degree, n - 1);
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        for (int d = 1; d <= k / 2; ++d) {
            int j = (i + d) % n;
            int a = std::min(i, j), b = std::max(i, j);
            if (a != b) edges.emplace(a, b);
        }
    }
    // Rewire a small fraction of chords to break exact regularity.
    std::vector<std::pair<int, int>> edge_list(edges.begin(), edges.end());
    for (const auto& e : edge_list) {
        if (!rng.bernoulli(cfg.rewire_prob)) continue;
        const int u = e.first;
        int v = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        if (v == u) continue;
        const int a = std::min(u, v), b = std::max(u, v);
        if (edges.count({a, b})) continue;
        edges.erase(e);
        edges.emplace(a, b);
    }
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

void fill_features(Graph& g, const SyntheticConfig& cfg, Rng& rng) {
    g.features.resize(g.num_nodes, cfg.feature_dim);
    for (int i = 0; i < g.num_nodes; ++i) {
        g.features(i, 0) = 1.0;
        for (int c = 1; c < cfg.feature_dim; ++c)
            g.features(i, c) = cfg.feature_noise * rng.normal();
    }
}

}  // namespace

Dataset make_synthetic_benchmark(const SyntheticConfig& cfg, std::uint64_t seed) {
    if (cfg.num_graphs < 2) throw contract_violation("synthetic: need at least 2 graphs");
    if (!(cfg.anomaly_ratio > 0.0 && cfg.anomaly_ratio < 1.0))
        throw contract_violation("synthetic: anomaly_ratio must lie in (0, 1)");
    if (cfg.min_nodes < 4 || cfg.max_nodes < cfg.min_nodes)
        throw contract_violation("synthetic: bad node-count range");
    if (cfg.feature_dim < 1) throw contract_violation("synthetic: feature_dim must be >= 1");

    const int num_anomalous =
        std::max(1, static_cast<int>(cfg.anomaly_ratio * cfg.num_graphs + 0.5));

    Dataset ds;
    ds.name = "synthetic";
    ds.graphs.reserve(static_cast<std::size_t>(cfg.num_graphs));
    Rng root(seed);
    for (int id = 0; id < cfg.num_graphs; ++id) {
        Rng rng = root.child("graph", static_cast<std::uint64_t>(id));
        const int n = cfg.min_nodes +
                      static_cast<int>(rng.uniform_index(
                          static_cast<std::uint64_t>(cfg.max_nodes - cfg.min_nodes + 1)));
        Graph g = (id < num_anomalous) ? make_near_regular_graph(id, n, cfg, rng)
                                       : make_community_graph(id, n, cfg, rng);
        fill_features(g, cfg, rng);
        ds.graphs.push_back(std::move(g));
    }
    ds.recount_classes();
    return ds;
}

}  // namespace fracaug
