#include "fracaug/config.hpp"
#include "fracaug/errors.hpp"
#include "fracaug/graph.hpp"
#include "fracaug/metrics.hpp"
#include "fracaug/pipeline.hpp"
#include "fracaug/synthetic.hpp"
#include "fracaug/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using fracaug::FlatConfig;

std::string env_data_dir() {
    const char* v = std::getenv("FRACAUG_DATA_DIR");
    return v ? std::string(v) : std::string();
}

void apply_overrides(FlatConfig& config, const std::vector<std::string>& pairs) {
    for (const auto& pair : pairs) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos)
            throw fracaug::config_error("--set expects key=value, got '" + pair + "'");
        config.set(pair.substr(0, eq), pair.substr(eq + 1));
    }
}

fracaug::Dataset dataset_from_config(const FlatConfig& config) {
    const std::string name = config.get("dataset");
    if (name == "synthetic") {
        fracaug::SyntheticConfig scfg;
        scfg.num_graphs = static_cast<int>(config.get_long("synthetic_graphs"));
        scfg.anomaly_ratio = config.get_double("synthetic_ratio");
        return fracaug::make_synthetic_benchmark(scfg, config.get_seed("synthetic_seed"));
    }
    std::string dir = config.get("data_dir");
    if (dir.empty()) dir = env_data_dir();
    if (dir.empty())
        throw fracaug::config_error(
            "data_dir not set (key, flag, or FRACAUG_DATA_DIR) for dataset " + name);
    return fracaug::load_tudataset(std::filesystem::path(dir) / name, name);
}

fracaug::GinConfig gin_from_config(const FlatConfig& config, int input_dim) {
    fracaug::GinConfig g;
    g.num_layers = static_cast<int>(config.get_long("num_layers"));
    g.hidden_dim = static_cast<int>(config.get_long("hidden_dim"));
    g.input_dim = input_dim;
    g.readout = config.get("readout") == "sum" ? fracaug::Readout::sum : fracaug::Readout::mean;
    g.epsilon = config.get_double("epsilon");
    return g;
}

fracaug::PipelineConfig pipeline_from_config(const FlatConfig& config) {
    fracaug::PipelineConfig p;
    p.k_large = static_cast<int>(config.get_long("k_l"));
    p.k_small = static_cast<int>(config.get_long("k_s"));
    p.h_large = static_cast<int>(config.get_long("H_l"));
    p.h_small = static_cast<int>(config.get_long("H_s"));
    p.warmup_epochs = static_cast<int>(config.get_long("e_warmup"));
    p.augment_every = static_cast<int>(config.get_long("e_aug"));
    p.fgg_steps = static_cast<int>(config.get_long("e_fgg"));
    p.total_epochs = static_cast<int>(config.get_long("e_f"));
    p.tau_normal = config.get_double("tau_n");
    p.tau_anomalous = config.get_double("tau_a");
    p.gnn_lr = config.get_double("gnn_lr");
    p.fgg_lr = config.get_double("fgg_lr");
    p.fd_step = config.get_double("fd_step");
    p.jobs = static_cast<int>(config.get_long("jobs"));
    return p;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) seeds.push_back(std::stoull(cell));
    if (seeds.empty()) throw fracaug::config_error("empty seed list");
    return seeds;
}

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd ms;
    for (double x : xs) ms.mean += x;
    ms.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
        ms.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return ms;
}

int cmd_ingest(const std::string& data_dir, const std::string& name, const std::string& out) {
    std::string dir = data_dir.empty() ? env_data_dir() : data_dir;
    if (dir.empty()) throw fracaug::config_error("--data-dir or FRACAUG_DATA_DIR required");
    const fracaug::Dataset ds = fracaug::load_tudataset(dir, name);
    double total_nodes = 0, total_edges = 0;
    for (const auto& g : ds.graphs) {
        total_nodes += g.num_nodes;
        total_edges += g.num_edges();
    }
    std::cout << "graphs=" << ds.num_graphs() << " normal=" << ds.class_counts[0]
              << " anomalous=" << ds.class_counts[1] << " F=" << ds.feature_dim()
              << " avg_nodes=" << total_nodes / ds.num_graphs()
              << " avg_edges=" << total_edges / ds.num_graphs() << "\n";
    if (!out.empty()) {
        fracaug::save_tudataset(ds, out, name);
        std::cout << "normalized archive written to " << out << "\n";
    }
    return 0;
}

int cmd_train(const FlatConfig& config, bool vanilla, const std::vector<std::uint64_t>& seeds) {
    const fracaug::Dataset ds = dataset_from_config(config);
    const fracaug::GinConfig gin = gin_from_config(config, ds.feature_dim());
    const fracaug::PipelineConfig pipe = pipeline_from_config(config);
    const std::filesystem::path out_root(config.get("out_dir"));

    // Caches are shared across seeds; the sidecar keys on (hash, k_l, k_s).
    std::vector<fracaug::SpectralCache> caches;
    if (!vanilla && pipe.total_epochs > pipe.warmup_epochs) {
        std::filesystem::create_directories(out_root);
        const auto cache_file = out_root / (ds.name + ".spectral_cache.json");
        caches = fracaug::build_caches(ds, pipe.k_large, pipe.k_small, pipe.jobs, &cache_file);
    }

    std::vector<double> aurocs, auprcs, f1s;
    for (std::uint64_t seed : seeds) {
        const auto split = fracaug::stratified_split(ds, config.get_double("train_fraction"),
                                                     config.get_double("val_fraction"), seed);
        const auto run_dir = out_root / (ds.name + std::string(vanilla ? "-vanilla" : "-fracaug") +
                                         "-seed" + std::to_string(seed));
        std::filesystem::create_directories(run_dir);
        config.write_snapshot(run_dir / "config.snapshot");
        fracaug::RunRecord rec;
        if (vanilla)
            rec = fracaug::run_vanilla(ds, split, gin, pipe.total_epochs, seed, &run_dir);
        else
            rec = fracaug::run_fracaug(ds, split, gin, pipe, seed, &run_dir,
                                       caches.empty() ? nullptr : &caches);
        std::cout << "seed " << seed << ": test auroc=" << rec.test_auroc
                  << " auprc=" << rec.test_auprc << " f1=" << rec.test_f1 << " (best epoch "
                  << rec.best_epoch << ", run dir " << run_dir.string() << ")\n";
        aurocs.push_back(rec.test_auroc);
        auprcs.push_back(rec.test_auprc);
        f1s.push_back(rec.test_f1);
    }
    const MeanStd a = mean_std(aurocs), p = mean_std(auprcs), f = mean_std(f1s);
    std::cout << "test AUROC " << a.mean << " +/- " << a.std_dev << "\n"
              << "test AUPRC " << p.mean << " +/- " << p.std_dev << "\n"
              << "test F1    " << f.mean << " +/- " << f.std_dev << "\n";
    return 0;
}

int cmd_eval(const std::string& run_dir_in) {
    const std::filesystem::path run_dir(run_dir_in);
    FlatConfig config;
    config.load_file(run_dir / "config.snapshot");
    const fracaug::Dataset ds = dataset_from_config(config);

    nlohmann::json report;
    {
        std::ifstream in(run_dir / "report.json");
        if (!in) throw fracaug::format_error("cannot open " + (run_dir / "report.json").string());
        in >> report;
    }
    const std::uint64_t seed = report.at("seed").get<std::uint64_t>();
    const auto split = fracaug::stratified_split(ds, config.get_double("train_fraction"),
                                                 config.get_double("val_fraction"), seed);
    const auto ckpt = fracaug::GinCheckpoint::load(run_dir / "model.ckpt");

    std::vector<double> scores;
    std::vector<int> labels;
    for (int id : split.test_ids) {
        const auto& g = ds.graphs[static_cast<std::size_t>(id)];
        scores.push_back(ckpt.model.forward(g.dense_adjacency(), g.features).probs[1]);
        labels.push_back(g.label);
    }
    const double roc = fracaug::auroc(scores, labels);
    const double prc = fracaug::auprc(scores, labels);
    const double f1 = fracaug::macro_f1(scores, labels);
    std::cout << "recomputed test auroc=" << roc << " auprc=" << prc << " f1=" << f1 << "\n";
    std::cout << "recorded   test auroc=" << report.at("test_auroc").get<double>()
              << " auprc=" << report.at("test_auprc").get<double>()
              << " f1=" << report.at("test_f1").get<double>() << "\n";
    const bool match = std::abs(roc - report.at("test_auroc").get<double>()) < 1e-12 &&
                       std::abs(prc - report.at("test_auprc").get<double>()) < 1e-12 &&
                       std::abs(f1 - report.at("test_f1").get<double>()) < 1e-12;
    std::cout << (match ? "checkpoint reproduces the recorded metrics\n"
                        : "MISMATCH against recorded metrics\n");
    return match ? 0 : 1;
}

int cmd_verify(const std::string& target, std::optional<double> alpha, int t_max,
               std::optional<double> delta, std::optional<double> rho, long trials,
               std::uint64_t seed, const std::string& out_path) {
    fracaug::VerifyResult result;
    if (target == "thm1")
        result = fracaug::verify_thm1(10, 16, 0.1, 1.0, t_max, alpha, seed);
    else if (target == "thm2")
        result = fracaug::verify_thm2(100, 16, alpha, seed);
    else if (target == "prop1")
        result = fracaug::verify_prop1(delta, rho, trials, seed);
    else if (target == "gradcheck")
        result = fracaug::verify_gradcheck(seed);
    else
        throw fracaug::config_error("unknown verify target '" + target +
                                    "' (expected thm1|thm2|prop1|gradcheck)");

    const std::string out = out_path.empty() ? ("verify_" + target + ".json") : out_path;
    std::ofstream of(out);
    if (!of) throw fracaug::format_error("cannot write report " + out);
    of << result.report.dump(2) << "\n";
    std::cout << target << ": " << (result.pass ? "PASS" : "FAIL") << " (report: " << out
              << ")\n";
    return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FracAug: spectral fractional-power graph augmentation engine"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "load a TUDataset directory and summarize it");
    std::string in_data_dir, in_name, in_out;
    ingest->add_option("--data-dir", in_data_dir, "directory containing <name>/<name>_*.txt");
    ingest->add_option("--name", in_name, "dataset name (file prefix)")->required();
    ingest->add_option("--out", in_out, "write a normalized dataset archive here");

    // train
    auto* train = app.add_subcommand("train", "run FracAug or vanilla training");
    std::string tr_config, tr_seeds = "1";
    bool tr_fracaug = false, tr_vanilla = false;
    std::vector<std::string> tr_sets;
    train->add_option("--config", tr_config, "flat key = value config file");
    train->add_flag("--fracaug", tr_fracaug, "run the full augmentation pipeline");
    train->add_flag("--vanilla", tr_vanilla, "run the weighted-CE baseline");
    train->add_option("--seed", tr_seeds, "comma-separated seed list");
    train->add_option("--set", tr_sets, "override config keys, key=value");
    std::string tr_data_dir, tr_out_dir;
    train->add_option("--data-dir", tr_data_dir, "dataset root directory");
    train->add_option("--out", tr_out_dir, "run output root");

    // eval
    auto* eval = app.add_subcommand("eval", "re-evaluate a finished run from its artifacts");
    std::string ev_run;
    eval->add_option("--run", ev_run, "run directory")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "numerical verification suites");
    std::string vf_target, vf_out;
    double vf_alpha = -1.0, vf_delta = -1.0, vf_rho = -2.0;
    int vf_tmax = 20;
    long vf_trials = 1000000;
    std::uint64_t vf_seed = 1;
    verify->add_option("target", vf_target, "thm1|thm2|prop1|gradcheck")->required();
    verify->add_option("--alpha", vf_alpha, "fractional power (thm1/thm2)");
    verify->add_option("--Tmax", vf_tmax, "maximum Chebyshev degree (thm1)");
    verify->add_option("--delta", vf_delta, "marginal error rate (prop1)");
    verify->add_option("--rho", vf_rho, "error correlation (prop1)");
    verify->add_option("--trials", vf_trials, "Monte-Carlo trials (prop1)");
    verify->add_option("--seed", vf_seed, "verification seed");
    verify->add_option("--out", vf_out, "report path (default verify_<target>.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest) return cmd_ingest(in_data_dir, in_name, in_out);
        if (*train) {
            if (tr_fracaug == tr_vanilla)
                throw fracaug::config_error("pass exactly one of --fracaug / --vanilla");
            FlatConfig config;
            if (!tr_config.empty()) config.load_file(tr_config);
            apply_overrides(config, tr_sets);
            if (!tr_data_dir.empty()) config.set("data_dir", tr_data_dir);
            if (!tr_out_dir.empty()) config.set("out_dir", tr_out_dir);
            return cmd_train(config, tr_vanilla, parse_seed_list(tr_seeds));
        }
        if (*eval) return cmd_eval(ev_run);
        if (*verify)
            return cmd_verify(vf_target,
                              vf_alpha >= 0.0 ? std::optional<double>(vf_alpha) : std::nullopt,
                              vf_tmax,
                              vf_delta >= 0.0 ? std::optional<double>(vf_delta) : std::nullopt,
                              vf_rho >= -1.0 ? std::optional<double>(vf_rho) : std::nullopt,
                              vf_trials, vf_seed, vf_out);
    } catch (const fracaug::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
