#include "fracaug/gin.hpp"

#include "fracaug/errors.hpp"
#include "fracaug/losses.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numeric>

namespace fracaug {

namespace {

Eigen::Map<Eigen::MatrixXd> view(Eigen::VectorXd& flat, Eigen::Index offset, Eigen::Index rows,
                                 Eigen::Index cols) {
    return Eigen::Map<Eigen::MatrixXd>(flat.data() + offset, rows, cols);
}

Eigen::Map<const Eigen::MatrixXd> view(const Eigen::VectorXd& flat, Eigen::Index offset,
                                       Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Eigen::MatrixXd>(flat.data() + offset, rows, cols);
}

}  // namespace

Eigen::Index GinModel::layer_input_dim(int layer) const {
    return layer == 0 ? config_.input_dim : config_.hidden_dim;
}

GinModel::GinModel(const GinConfig& config, Rng& rng) : config_(config) {
    if (config.num_layers < 1 || config.hidden_dim < 1 || config.input_dim < 1)
        throw contract_violation("GinModel: layers, hidden_dim and input_dim must be >= 1");

    Eigen::Index total = 0;
    layout_.resize(static_cast<std::size_t>(config.num_layers));
    for (int l = 0; l < config.num_layers; ++l) {
        const Eigen::Index d_in = layer_input_dim(l);
        const Eigen::Index d_h = config.hidden_dim;
        auto& lay = layout_[static_cast<std::size_t>(l)];
        lay.w1 = total; total += d_in * d_h;
        lay.b1 = total; total += d_h;
        lay.w2 = total; total += d_h * d_h;
        lay.b2 = total; total += d_h;
    }
    total += config.hidden_dim * 2 + 2;  // classifier
    params_.resize(total);

    // Glorot-uniform, drawn in a fixed order.
    auto fill = [&rng, this](Eigen::Index offset, Eigen::Index rows, Eigen::Index cols) {
        const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
        auto w = view(params_, offset, rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) w(r, c) = rng.uniform(-bound, bound);
    };
    for (int l = 0; l < config.num_layers; ++l) {
        const Eigen::Index d_in = layer_input_dim(l);
        const Eigen::Index d_h = config.hidden_dim;
        const auto& lay = layout_[static_cast<std::size_t>(l)];
        fill(lay.w1, d_in, d_h);
        view(params_, lay.b1, d_h, 1).setZero();
        fill(lay.w2, d_h, d_h);
        view(params_, lay.b2, d_h, 1).setZero();
    }
    fill(offset_classifier_w(), config.hidden_dim, 2);
    view(params_, offset_classifier_b(), 2, 1).setZero();
}

Eigen::Index GinModel::offset_classifier_w() const {
    const auto& last = layout_.back();
    return last.b2 + config_.hidden_dim;
}

Eigen::Index GinModel::offset_classifier_b() const {
    return offset_classifier_w() + config_.hidden_dim * 2;
}

GinModel::Forward GinModel::forward(const Eigen::MatrixXd& adjacency,
                                    const Eigen::MatrixXd& features) const {
    const Eigen::Index n = features.rows();
    if (adjacency.rows() != n || adjacency.cols() != n)
        throw contract_violation("GinModel::forward: adjacency/features node count mismatch");
    if (features.cols() != config_.input_dim)
        throw contract_violation("GinModel::forward: feature dim " +
                                 std::to_string(features.cols()) + " != configured " +
                                 std::to_string(config_.input_dim));

    Forward out;
    out.node_features = features;
    out.adjacency = adjacency;
    const int L = config_.num_layers;
    out.layer_input.resize(static_cast<std::size_t>(L));
    out.pre_act1.resize(static_cast<std::size_t>(L));
    out.hidden_mid.resize(static_cast<std::size_t>(L));
    out.pre_act2.resize(static_cast<std::size_t>(L));
    out.hidden_out.resize(static_cast<std::size_t>(L));

    Eigen::MatrixXd h = features;
    for (int l = 0; l < L; ++l) {
        const auto& lay = layout_[static_cast<std::size_t>(l)];
        const Eigen::Index d_in = layer_input_dim(l);
        const Eigen::Index d_h = config_.hidden_dim;
        const auto w1 = view(params_, lay.w1, d_in, d_h);
        const auto b1 = view(params_, lay.b1, d_h, 1);
        const auto w2 = view(params_, lay.w2, d_h, d_h);
        const auto b2 = view(params_, lay.b2, d_h, 1);

        Eigen::MatrixXd z = (1.0 + config_.epsilon) * h + adjacency * h;
        Eigen::MatrixXd a1 = (z * w1).rowwise() + b1.col(0).transpose();
        Eigen::MatrixXd h1 = a1.cwiseMax(0.0);
        Eigen::MatrixXd a2 = (h1 * w2).rowwise() + b2.col(0).transpose();
        Eigen::MatrixXd hout = a2.cwiseMax(0.0);

        out.layer_input[static_cast<std::size_t>(l)] = std::move(z);
        out.pre_act1[static_cast<std::size_t>(l)] = std::move(a1);
        out.hidden_mid[static_cast<std::size_t>(l)] = std::move(h1);
        out.pre_act2[static_cast<std::size_t>(l)] = std::move(a2);
        out.hidden_out[static_cast<std::size_t>(l)] = hout;
        h = std::move(hout);
    }

    out.embedding = config_.readout == Readout::mean
                        ? Eigen::VectorXd(h.colwise().mean())
                        : Eigen::VectorXd(h.colwise().sum());
    const auto wc = view(params_, offset_classifier_w(), config_.hidden_dim, 2);
    const auto bc = view(params_, offset_classifier_b(), 2, 1);
    const Eigen::Vector2d s = wc.transpose() * out.embedding + bc.col(0);
    out.logits = {s(0), s(1)};
    const double mx = std::max(s(0), s(1));
    const double e0 = std::exp(s(0) - mx);
    const double e1 = std::exp(s(1) - mx);
    out.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
    return out;
}

Eigen::VectorXd GinModel::backward(const Forward& state, const std::array<double, 2>& grad_logits,
                                   const Eigen::VectorXd* grad_embedding) const {
    Eigen::VectorXd grads = Eigen::VectorXd::Zero(params_.size());
    const Eigen::Index n = state.node_features.rows();
    const Eigen::Index d_h = config_.hidden_dim;
    const int L = config_.num_layers;
    if (static_cast<int>(state.hidden_out.size()) != L)
        throw contract_violation("GinModel::backward: forward state does not match model");

    const Eigen::Vector2d gs(grad_logits[0], grad_logits[1]);
    const auto wc = view(params_, offset_classifier_w(), d_h, 2);
    view(grads, offset_classifier_w(), d_h, 2) = state.embedding * gs.transpose();
    view(grads, offset_classifier_b(), 2, 1) = gs;

    Eigen::VectorXd go = wc * gs;
    if (grad_embedding) {
        if (grad_embedding->size() != d_h)
            throw contract_violation("GinModel::backward: embedding gradient dim mismatch");
        go += *grad_embedding;
    }

    // Readout gradient spreads over nodes.
    Eigen::MatrixXd gh(n, d_h);
    const double readout_scale =
        config_.readout == Readout::mean ? 1.0 / static_cast<double>(n) : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) gh.row(i) = readout_scale * go.transpose();

    for (int l = L - 1; l >= 0; --l) {
        const auto& lay = layout_[static_cast<std::size_t>(l)];
        const Eigen::Index d_in = layer_input_dim(l);
        const auto w1 = view(params_, lay.w1, d_in, d_h);
        const auto w2 = view(params_, lay.w2, d_h, d_h);
        const auto& z = state.layer_input[static_cast<std::size_t>(l)];
        const auto& a1 = state.pre_act1[static_cast<std::size_t>(l)];
        const auto& h1 = state.hidden_mid[static_cast<std::size_t>(l)];
        const auto& a2 = state.pre_act2[static_cast<std::size_t>(l)];

        Eigen::MatrixXd ga2 =
            gh.cwiseProduct((a2.array() > 0.0).cast<double>().matrix());
        view(grads, lay.w2, d_h, d_h) += h1.transpose() * ga2;
        view(grads, lay.b2, d_h, 1) += ga2.colwise().sum().transpose();
        Eigen::MatrixXd gh1 = ga2 * w2.transpose();
        Eigen::MatrixXd ga1 =
            gh1.cwiseProduct((a1.array() > 0.0).cast<double>().matrix());
        view(grads, lay.w1, d_in, d_h) += z.transpose() * ga1;
        view(grads, lay.b1, d_h, 1) += ga1.colwise().sum().transpose();
        if (l > 0) {
            Eigen::MatrixXd gz = ga1 * w1.transpose();
            gh = (1.0 + config_.epsilon) * gz + state.adjacency.transpose() * gz;
        }
    }
    return grads;
}

double train_epoch(GinModel& model, AdamState& opt_state, const AdamConfig& opt_config,
                   const std::vector<const Eigen::MatrixXd*>& adjacencies,
                   const std::vector<const Eigen::MatrixXd*>& features,
                   const std::vector<int>& labels, long n_class0, long n_class1,
                   Rng& shuffle_rng) {
    if (adjacencies.size() != features.size() || adjacencies.size() != labels.size())
        throw contract_violation("train_epoch: input lists are not aligned");
    if (n_class0 < 1 || n_class1 < 1)
        throw config_error("train_epoch: both classes must be present");

    std::vector<std::size_t> order(adjacencies.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);

    double total_loss = 0.0;
    for (std::size_t idx : order) {
        const int y = labels[idx];
        const double weight = 1.0 / static_cast<double>(y == 1 ? n_class1 : n_class0);
        const auto fwd = model.forward(*adjacencies[idx], *features[idx]);
        const MarginCeResult ce = margin_ce(fwd.logits, y, 0.0, weight);
        total_loss += ce.loss;
        const Eigen::VectorXd grads = model.backward(fwd, ce.grad_logits);
        adam_step(opt_state, model.params(), grads, opt_config);
    }
    return total_loss / static_cast<double>(adjacencies.size());
}

namespace {
constexpr int kCheckpointVersion = 1;
}

void GinCheckpoint::save(const std::filesystem::path& file) const {
    nlohmann::json doc;
    doc["format_version"] = kCheckpointVersion;
    doc["config"] = {{"num_layers", model.config().num_layers},
                     {"hidden_dim", model.config().hidden_dim},
                     {"input_dim", model.config().input_dim},
                     {"readout", model.config().readout == Readout::mean ? "mean" : "sum"},
                     {"epsilon", model.config().epsilon}};
    doc["params"] = std::vector<double>(model.params().data(),
                                        model.params().data() + model.params().size());
    doc["adam_m"] = std::vector<double>(opt_state.first_moment.data(),
                                        opt_state.first_moment.data() + opt_state.first_moment.size());
    doc["adam_v"] = std::vector<double>(opt_state.second_moment.data(),
                                        opt_state.second_moment.data() + opt_state.second_moment.size());
    doc["adam_step"] = opt_state.step;
    doc["root_seed"] = root_seed;
    doc["epoch"] = epoch;
    std::ofstream out(file);
    if (!out) throw format_error("cannot write checkpoint " + file.string());
    out << doc.dump();
}

GinCheckpoint GinCheckpoint::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw format_error("cannot open checkpoint " + file.string());
    nlohmann::json doc;
    in >> doc;
    if (doc.value("format_version", -1) != kCheckpointVersion)
        throw format_error("checkpoint " + file.string() + ": unsupported format version");

    GinConfig config;
    config.num_layers = doc["config"]["num_layers"].get<int>();
    config.hidden_dim = doc["config"]["hidden_dim"].get<int>();
    config.input_dim = doc["config"]["input_dim"].get<int>();
    config.readout = doc["config"]["readout"].get<std::string>() == "sum" ? Readout::sum
                                                                          : Readout::mean;
    config.epsilon = doc["config"]["epsilon"].get<double>();

    GinCheckpoint ckpt;
    Rng throwaway(0);
    ckpt.model = GinModel(config, throwaway);
    const auto params = doc["params"].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(params.size()) != ckpt.model.num_params())
        throw format_error("checkpoint " + file.string() + ": parameter count mismatch");
    ckpt.model.params() =
        Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<long>(params.size()));
    const auto m = doc["adam_m"].get<std::vector<double>>();
    const auto v = doc["adam_v"].get<std::vector<double>>();
    ckpt.opt_state.first_moment =
        Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<long>(m.size()));
    ckpt.opt_state.second_moment =
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
    ckpt.opt_state.step = doc["adam_step"].get<long>();
    ckpt.root_seed = doc["root_seed"].get<std::uint64_t>();
    ckpt.epoch = doc["epoch"].get<long>();
    return ckpt;
}

}  // namespace fracaug
