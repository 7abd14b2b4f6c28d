#include "fracaug/graph.hpp"

#include "fracaug/errors.hpp"
#include "fracaug/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fracaug {

namespace {

std::filesystem::path component_path(const std::filesystem::path& dir, const std::string& name,
                                     const char* suffix) {
    return dir / (name + suffix);
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw format_error("cannot open " + file.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // Trailing blank lines are common in shipped archives; interior blanks are not.
    while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos)
        lines.pop_back();
    return lines;
}

long parse_long(const std::string& text, const std::filesystem::path& file, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        long v = std::stol(text, &pos);
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos != text.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw format_error(file.string() + ":" + std::to_string(line_no) +
                           ": expected integer, got '" + text + "'");
    }
}

std::vector<double> parse_csv_doubles(const std::string& line, const std::filesystem::path& file,
                                      std::size_t line_no) {
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            values.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw format_error(file.string() + ":" + std::to_string(line_no) +
                               ": expected real number, got '" + cell + "'");
        }
    }
    if (values.empty())
        throw format_error(file.string() + ":" + std::to_string(line_no) + ": empty line");
    return values;
}

}  // namespace

Eigen::MatrixXd Graph::dense_adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
    for (const auto& [i, j] : edges) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

std::vector<double> Graph::degrees() const {
    std::vector<double> d(static_cast<std::size_t>(num_nodes), 0.0);
    for (const auto& [i, j] : edges) {
        d[static_cast<std::size_t>(i)] += 1.0;
        d[static_cast<std::size_t>(j)] += 1.0;
    }
    return d;
}

void Dataset::recount_classes() {
    class_counts[0] = class_counts[1] = 0;
    for (const auto& g : graphs) ++class_counts[g.label == 1 ? 1 : 0];
}

std::uint64_t Dataset::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ull;
        }
    };
    mix(static_cast<std::uint64_t>(graphs.size()));
    for (const auto& g : graphs) {
        mix(static_cast<std::uint64_t>(g.num_nodes));
        mix(static_cast<std::uint64_t>(g.label));
        for (const auto& [i, j] : g.edges) {
            mix(static_cast<std::uint64_t>(i));
            mix(static_cast<std::uint64_t>(j));
        }
        mix(static_cast<std::uint64_t>(g.features.cols()));
        for (Eigen::Index r = 0; r < g.features.rows(); ++r)
            for (Eigen::Index c = 0; c < g.features.cols(); ++c) {
                double v = g.features(r, c);
                std::uint64_t bits;
                static_assert(sizeof(bits) == sizeof(v));
                std::memcpy(&bits, &v, sizeof(bits));
                mix(bits);
            }
    }
    return h;
}

Dataset load_tudataset(const std::filesystem::path& directory, const std::string& name) {
    const auto a_path = component_path(directory, name, "_A.txt");
    const auto indicator_path = component_path(directory, name, "_graph_indicator.txt");
    const auto labels_path = component_path(directory, name, "_graph_labels.txt");
    const auto node_labels_path = component_path(directory, name, "_node_labels.txt");
    const auto node_attrs_path = component_path(directory, name, "_node_attributes.txt");

    for (const auto& p : {a_path, indicator_path, labels_path}) {
        if (!std::filesystem::exists(p)) throw format_error("missing required file " + p.string());
    }
    const bool have_node_labels = std::filesystem::exists(node_labels_path);
    const bool have_node_attrs = std::filesystem::exists(node_attrs_path);
    if (!have_node_labels && !have_node_attrs)
        throw format_error("missing node feature source: need " + node_labels_path.string() +
                           " or " + node_attrs_path.string());

    // Node -> graph assignment (1-indexed ids in the files).
    const auto indicator_lines = read_lines(indicator_path);
    const long total_nodes = static_cast<long>(indicator_lines.size());
    if (total_nodes == 0) throw format_error(indicator_path.string() + ": no nodes");
    std::vector<int> node_graph(static_cast<std::size_t>(total_nodes));
    int num_graphs = 0;
    for (std::size_t k = 0; k < indicator_lines.size(); ++k) {
        long gid = parse_long(indicator_lines[k], indicator_path, k + 1);
        if (gid < 1)
            throw integrity_error(indicator_path.string() + ":" + std::to_string(k + 1) +
                                  ": graph id must be >= 1");
        node_graph[k] = static_cast<int>(gid - 1);
        num_graphs = std::max(num_graphs, static_cast<int>(gid));
    }

    const auto label_lines = read_lines(labels_path);
    if (static_cast<int>(label_lines.size()) != num_graphs)
        throw format_error(labels_path.string() + ": expected " + std::to_string(num_graphs) +
                           " labels, found " + std::to_string(label_lines.size()));
    std::vector<long> raw_labels(label_lines.size());
    for (std::size_t k = 0; k < label_lines.size(); ++k)
        raw_labels[k] = parse_long(label_lines[k], labels_path, k + 1);

    // Per-graph node index ranges; TUDataset numbers nodes consecutively per graph.
    std::vector<int> graph_size(static_cast<std::size_t>(num_graphs), 0);
    std::vector<long> node_local(static_cast<std::size_t>(total_nodes));
    for (long k = 0; k < total_nodes; ++k) {
        int g = node_graph[static_cast<std::size_t>(k)];
        node_local[static_cast<std::size_t>(k)] = graph_size[static_cast<std::size_t>(g)]++;
    }

    // Features.
    Eigen::MatrixXd all_features;
    long feature_dim = 0;
    std::vector<long> label_values;
    std::vector<long> node_label_ids;
    if (have_node_labels) {
        const auto lines = read_lines(node_labels_path);
        if (static_cast<long>(lines.size()) != total_nodes)
            throw format_error(node_labels_path.string() + ": expected " +
                               std::to_string(total_nodes) + " lines, found " +
                               std::to_string(lines.size()));
        node_label_ids.resize(lines.size());
        std::set<long> distinct;
        for (std::size_t k = 0; k < lines.size(); ++k) {
            node_label_ids[k] = parse_long(lines[k], node_labels_path, k + 1);
            distinct.insert(node_label_ids[k]);
        }
        label_values.assign(distinct.begin(), distinct.end());
    }
    Eigen::MatrixXd raw_attrs;
    if (have_node_attrs) {
        const auto lines = read_lines(node_attrs_path);
        if (static_cast<long>(lines.size()) != total_nodes)
            throw format_error(node_attrs_path.string() + ": expected " +
                               std::to_string(total_nodes) + " lines, found " +
                               std::to_string(lines.size()));
        std::vector<std::vector<double>> rows(lines.size());
        std::size_t width = 0;
        for (std::size_t k = 0; k < lines.size(); ++k) {
            rows[k] = parse_csv_doubles(lines[k], node_attrs_path, k + 1);
            if (k == 0)
                width = rows[k].size();
            else if (rows[k].size() != width)
                throw format_error(node_attrs_path.string() + ":" + std::to_string(k + 1) +
                                   ": inconsistent attribute count");
        }
        raw_attrs.resize(total_nodes, static_cast<long>(width));
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (std::size_t c = 0; c < rows[k].size(); ++c)
                raw_attrs(static_cast<long>(k), static_cast<long>(c)) = rows[k][c];
    }
    const long onehot_dim = static_cast<long>(label_values.size());
    feature_dim = onehot_dim + (have_node_attrs ? raw_attrs.cols() : 0);
    all_features = Eigen::MatrixXd::Zero(total_nodes, feature_dim);
    if (have_node_labels) {
        std::map<long, long> col_of;
        for (std::size_t i = 0; i < label_values.size(); ++i)
            col_of[label_values[i]] = static_cast<long>(i);
        for (long k = 0; k < total_nodes; ++k)
            all_features(k, col_of.at(node_label_ids[static_cast<std::size_t>(k)])) = 1.0;
    }
    if (have_node_attrs) all_features.rightCols(raw_attrs.cols()) = raw_attrs;

    // Edges: 1-indexed global node ids, dedup, symmetrize, drop self-loops.
    const auto edge_lines = read_lines(a_path);
    std::vector<std::set<std::pair<int, int>>> edge_sets(static_cast<std::size_t>(num_graphs));
    long dropped_self_loops = 0;
    for (std::size_t k = 0; k < edge_lines.size(); ++k) {
        const std::string& line = edge_lines[k];
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw format_error(a_path.string() + ":" + std::to_string(k + 1) +
                               ": expected 'i, j'");
        long u = parse_long(line.substr(0, comma), a_path, k + 1);
        long v = parse_long(line.substr(comma + 1), a_path, k + 1);
        if (u < 1 || u > total_nodes || v < 1 || v > total_nodes)
            throw integrity_error(a_path.string() + ":" + std::to_string(k + 1) +
                                  ": node id out of range [1, " + std::to_string(total_nodes) +
                                  "]");
        const int gu = node_graph[static_cast<std::size_t>(u - 1)];
        const int gv = node_graph[static_cast<std::size_t>(v - 1)];
        if (gu != gv)
            throw integrity_error(a_path.string() + ":" + std::to_string(k + 1) +
                                  ": edge endpoints belong to different graphs (" +
                                  std::to_string(gu + 1) + " vs " + std::to_string(gv + 1) + ")");
        if (u == v) {
            ++dropped_self_loops;
            continue;
        }
        int li = static_cast<int>(node_local[static_cast<std::size_t>(u - 1)]);
        int lj = static_cast<int>(node_local[static_cast<std::size_t>(v - 1)]);
        if (li > lj) std::swap(li, lj);
        edge_sets[static_cast<std::size_t>(gu)].emplace(li, lj);
    }
    if (dropped_self_loops > 0)
        std::cerr << "warning: " << name << ": dropped " << dropped_self_loops
                  << " self-loop edge(s)\n";

    // Label remap: minority -> 1. On a tie the larger raw label becomes 1.
    std::map<long, long> label_count;
    for (long v : raw_labels) ++label_count[v];
    if (label_count.size() != 2)
        throw unsupported_error(name + ": expected exactly 2 graph label values, found " +
                                std::to_string(label_count.size()));
    const auto first = *label_count.begin();
    const auto second = *std::next(label_count.begin());
    long anomalous_raw;
    if (first.second != second.second)
        anomalous_raw = (first.second < second.second) ? first.first : second.first;
    else
        anomalous_raw = std::max(first.first, second.first);

    Dataset ds;
    ds.name = name;
    ds.graphs.resize(static_cast<std::size_t>(num_graphs));
    std::vector<long> node_offset(static_cast<std::size_t>(num_graphs), 0);
    {
        long off = 0;
        for (int g = 0; g < num_graphs; ++g) {
            node_offset[static_cast<std::size_t>(g)] = off;
            off += graph_size[static_cast<std::size_t>(g)];
        }
    }
    // Consecutive numbering check: node k's global row must be offset+local.
    for (long k = 0; k < total_nodes; ++k) {
        int g = node_graph[static_cast<std::size_t>(k)];
        if (node_offset[static_cast<std::size_t>(g)] + node_local[static_cast<std::size_t>(k)] != k)
            throw integrity_error(indicator_path.string() +
                                  ": nodes of one graph are not consecutive (node line " +
                                  std::to_string(k + 1) + ")");
    }
    for (int g = 0; g < num_graphs; ++g) {
        Graph& graph = ds.graphs[static_cast<std::size_t>(g)];
        graph.id = g;
        graph.num_nodes = graph_size[static_cast<std::size_t>(g)];
        graph.edges.assign(edge_sets[static_cast<std::size_t>(g)].begin(),
                           edge_sets[static_cast<std::size_t>(g)].end());
        graph.features = all_features.middleRows(node_offset[static_cast<std::size_t>(g)],
                                                 graph.num_nodes);
        graph.label = (raw_labels[static_cast<std::size_t>(g)] == anomalous_raw) ? 1 : 0;
    }
    ds.recount_classes();
    return ds;
}

void save_tudataset(const Dataset& dataset, const std::filesystem::path& directory,
                    const std::string& name) {
    std::filesystem::create_directories(directory);
    std::ofstream a_out(component_path(directory, name, "_A.txt"));
    std::ofstream ind_out(component_path(directory, name, "_graph_indicator.txt"));
    std::ofstream lab_out(component_path(directory, name, "_graph_labels.txt"));
    std::ofstream attr_out(component_path(directory, name, "_node_attributes.txt"));
    if (!a_out || !ind_out || !lab_out || !attr_out)
        throw format_error("cannot write dataset files under " + directory.string());

    char buf[64];
    long offset = 0;
    for (const auto& g : dataset.graphs) {
        for (const auto& [i, j] : g.edges) {
            a_out << offset + i + 1 << ", " << offset + j + 1 << "\n";
            a_out << offset + j + 1 << ", " << offset + i + 1 << "\n";
        }
        for (int k = 0; k < g.num_nodes; ++k) {
            ind_out << g.id + 1 << "\n";
            for (Eigen::Index c = 0; c < g.features.cols(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", g.features(k, c));
                attr_out << (c ? ", " : "") << buf;
            }
            attr_out << "\n";
        }
        lab_out << g.label << "\n";
        offset += g.num_nodes;
    }
}

SplitAssignment stratified_split(const Dataset& dataset, double train_fraction,
                                 double val_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(val_fraction > 0.0) ||
        !(train_fraction + val_fraction < 1.0))
        throw contract_violation("split fractions must be positive and sum below 1");

    std::vector<int> by_class[2];
    for (int i = 0; i < dataset.num_graphs(); ++i)
        by_class[dataset.graphs[static_cast<std::size_t>(i)].label == 1 ? 1 : 0].push_back(i);
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < 3)
            throw config_error("split infeasible: class " + std::to_string(c) + " has only " +
                               std::to_string(by_class[c].size()) + " graphs (need >= 3)");

    SplitAssignment split;
    split.seed = seed;
    Rng rng = Rng(seed).child("split");
    for (int c = 0; c < 2; ++c) {
        auto ids = by_class[c];
        rng.shuffle(ids);
        const auto count = static_cast<double>(ids.size());
        // Small bias guard so exact products like 0.01 * 100 do not round up.
        auto take = [count](double f) {
            return std::max<std::size_t>(
                1, static_cast<std::size_t>(std::ceil(f * count - 1e-9)));
        };
        std::size_t n_train = take(train_fraction);
        std::size_t n_val = take(val_fraction);
        if (n_train + n_val >= ids.size()) {
            n_train = std::max<std::size_t>(1, ids.size() - 2);
            n_val = 1;
        }
        std::size_t k = 0;
        for (; k < n_train; ++k) split.train_ids.push_back(ids[k]);
        for (; k < n_train + n_val; ++k) split.val_ids.push_back(ids[k]);
        for (; k < ids.size(); ++k) split.test_ids.push_back(ids[k]);
    }
    std::sort(split.train_ids.begin(), split.train_ids.end());
    std::sort(split.val_ids.begin(), split.val_ids.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    return split;
}

}  // namespace fracaug
