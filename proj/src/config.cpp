#include "fracaug/config.hpp"

#include "fracaug/errors.hpp"

#include <fstream>
#include <sstream>

namespace fracaug {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

}  // namespace

FlatConfig::FlatConfig() {
    values_ = {
        {"data_dir", ""},
        {"dataset", "synthetic"},
        {"out_dir", "runs"},
        {"seed", "1"},
        {"train_fraction", "0.01"},
        {"val_fraction", "0.01"},
        {"k_l", "3"},
        {"k_s", "3"},
        {"H_l", "3"},
        {"H_s", "3"},
        {"e_warmup", "25"},
        {"e_aug", "25"},
        {"e_fgg", "10"},
        {"e_f", "200"},
        {"tau_n", "0.05"},
        {"tau_a", "0.95"},
        {"gnn_lr", "0.001"},
        {"fgg_lr", "0.01"},
        {"fd_step", "0.001"},
        {"hidden_dim", "64"},
        {"num_layers", "2"},
        {"readout", "mean"},
        {"epsilon", "0"},
        {"jobs", "1"},
        {"synthetic_graphs", "2000"},
        {"synthetic_ratio", "0.08"},
        {"synthetic_seed", "7"},
    };
}

void FlatConfig::load_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw format_error("cannot open config file " + file.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw format_error(file.string() + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
        try {
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const Error& e) {
            throw config_error(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void FlatConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("unknown configuration key '" + key + "'");
    it->second = value;
}

const std::string& FlatConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("unknown configuration key '" + key + "'");
    return it->second;
}

long FlatConfig::get_long(const std::string& key) const {
    try {
        return std::stol(get(key));
    } catch (const std::exception&) {
        throw config_error("key '" + key + "' is not an integer: '" + get(key) + "'");
    }
}

double FlatConfig::get_double(const std::string& key) const {
    try {
        return std::stod(get(key));
    } catch (const std::exception&) {
        throw config_error("key '" + key + "' is not a number: '" + get(key) + "'");
    }
}

std::uint64_t FlatConfig::get_seed(const std::string& key) const {
    try {
        return std::stoull(get(key));
    } catch (const std::exception&) {
        throw config_error("key '" + key + "' is not a seed: '" + get(key) + "'");
    }
}

std::string FlatConfig::snapshot() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    return out.str();
}

void FlatConfig::write_snapshot(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw format_error("cannot write snapshot " + file.string());
    out << snapshot();
}

}  // namespace fracaug
