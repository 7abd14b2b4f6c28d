#include "fracaug/spectral.hpp"

#include "fracaug/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

namespace fracaug {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void require_symmetric(const Eigen::MatrixXd& m, double tol, const char* who) {
    if (m.rows() != m.cols()) throw contract_violation(std::string(who) + ": matrix not square");
    const double gap = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (gap > tol)
        throw contract_violation(std::string(who) + ": matrix not symmetric (max gap " +
                                 std::to_string(gap) + ")");
}

}  // namespace

Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& adjacency) {
    require_symmetric(adjacency, 0.0, "normalize_adjacency");
    const Eigen::Index n = adjacency.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        if (adjacency(i, i) != 0.0)
            throw contract_violation("normalize_adjacency: nonzero diagonal at " +
                                     std::to_string(i));
    Eigen::VectorXd inv_sqrt_deg(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = adjacency.row(i).sum();
        inv_sqrt_deg(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    return inv_sqrt_deg.asDiagonal() * adjacency * inv_sqrt_deg.asDiagonal();
}

Eigen::MatrixXd hat_transform(const Eigen::MatrixXd& normalized) {
    require_symmetric(normalized, 1e-10, "hat_transform");
    const Eigen::Index n = normalized.rows();
    return 0.5 * (Eigen::MatrixXd::Identity(n, n) + normalized);
}

// Cyclic Jacobi: repeated sweeps of 2x2 rotations zeroing every off-diagonal
// entry in turn. Quadratic convergence once entries are small; fine for the
// desk-scale graphs this engine targets (n up to a few hundred).
SymEvd sym_evd(const Eigen::MatrixXd& m) {
    require_symmetric(m, 1e-10, "sym_evd");
    const Eigen::Index n = m.rows();
    Eigen::MatrixXd a = 0.5 * (m + m.transpose());  // kill representational noise
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    const int max_sweeps = 64;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double tol = 1e-15 * scale;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= tol) break;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol * 1e-2) continue;
                const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // A <- J^T A J with J the (p,q) rotation.
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == max_sweeps)
        throw numeric_error("sym_evd: Jacobi failed to converge after " +
                            std::to_string(max_sweeps) + " sweeps");

    SymEvd out;
    out.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.values(i) = a(i, i);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return out.values(x) > out.values(y);
    });
    SymEvd sorted;
    sorted.values.resize(n);
    sorted.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        sorted.values(i) = out.values(order[static_cast<std::size_t>(i)]);
        sorted.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
        // Deterministic sign: largest-magnitude component positive.
        Eigen::Index arg = 0;
        sorted.vectors.col(i).cwiseAbs().maxCoeff(&arg);
        if (sorted.vectors(arg, i) < 0.0) sorted.vectors.col(i) = -sorted.vectors.col(i);
    }
    return sorted;
}

SpectralCache truncate_evd(const SymEvd& evd, int k_large, int k_small) {
    const int n = static_cast<int>(evd.values.size());
    if (n == 0) throw domain_error("truncate_evd: empty graph");
    if (k_large < 1 || k_small < 1)
        throw contract_violation("truncate_evd: k_l and k_s must be >= 1");
    for (int i = 0; i < n; ++i) {
        const double v = evd.values(i);
        if (v < -1e-10 || v > 1.0 + 1e-10)
            throw domain_error("truncate_evd: eigenvalue " + std::to_string(v) +
                               " outside [0, 1] tolerance band");
    }
    const int kl = std::min(k_large, n);
    const int ks = std::min(k_small, n - kl);  // the blocks never share an eigenpair

    SpectralCache cache;
    cache.u_large = evd.vectors.leftCols(kl);
    cache.lambda_large = evd.values.head(kl).cwiseMax(0.0).cwiseMin(1.0);
    cache.u_small.resize(n, ks);
    cache.lambda_small.resize(ks);
    for (int i = 0; i < ks; ++i) {
        // Ascending order: last column of the descending EVD first.
        cache.u_small.col(i) = evd.vectors.col(n - 1 - i);
        cache.lambda_small(i) = std::clamp(evd.values(n - 1 - i), 0.0, 1.0);
    }
    return cache;
}

Eigen::MatrixXd fractional_power(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                                 double alpha) {
    if (alpha < 0.0) throw domain_error("fractional_power: alpha must be >= 0");
    if (values.size() != vectors.cols())
        throw contract_violation("fractional_power: eigenpair count mismatch");
    const Eigen::Index n = vectors.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double lambda = values(i);
        if (lambda < 0.0)
            throw domain_error("fractional_power: negative eigenvalue " + std::to_string(lambda));
        const double w = (alpha == 0.0) ? 1.0 : std::pow(lambda, alpha);
        if (w != 0.0) out.noalias() += w * vectors.col(i) * vectors.col(i).transpose();
    }
    return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd fractional_power(const SymEvd& evd, double alpha) {
    return fractional_power(evd.values, evd.vectors, alpha);
}

double ChebyshevApprox::eval(double x) const {
    if (coeffs.empty()) return 0.0;
    const double u = (2.0 * x - (hi + lo)) / (hi - lo);
    double acc = coeffs[0];
    double t_prev = 1.0;
    double t_cur = u;
    for (std::size_t t = 1; t < coeffs.size(); ++t) {
        acc += coeffs[t] * t_cur;
        const double t_next = 2.0 * u * t_cur - t_prev;
        t_prev = t_cur;
        t_cur = t_next;
    }
    return acc;
}

ChebyshevApprox chebyshev_coeffs(double alpha, double lo, double hi, int degree) {
    if (!(lo > 0.0)) throw domain_error("chebyshev_coeffs: interval must exclude 0 (branch point)");
    if (!(hi > lo)) throw domain_error("chebyshev_coeffs: need lo < hi");
    if (degree < 0) throw contract_violation("chebyshev_coeffs: degree must be >= 0");
    if (alpha < 0.0) throw domain_error("chebyshev_coeffs: alpha must be >= 0");

    ChebyshevApprox approx;
    approx.alpha = alpha;
    approx.lo = lo;
    approx.hi = hi;
    approx.coeffs.assign(static_cast<std::size_t>(degree) + 1, 0.0);

    // Chebyshev-Gauss quadrature: int_{-1}^{1} g(x)/sqrt(1-x^2) dx
    // = (pi/Q) * sum g(cos((2q-1)pi/2Q)). The 1/pi and 2/pi weights then
    // reduce to 1/Q and 2/Q.
    const int q_nodes = std::max(64, 4 * degree);
    for (int q = 1; q <= q_nodes; ++q) {
        const double angle = (2.0 * q - 1.0) * kPi / (2.0 * q_nodes);
        const double x = std::cos(angle);
        const double mapped = 0.5 * ((hi - lo) * x + (hi + lo));
        const double f = std::pow(mapped, alpha);
        for (int t = 0; t <= degree; ++t)
            approx.coeffs[static_cast<std::size_t>(t)] += f * std::cos(t * angle);
    }
    approx.coeffs[0] /= q_nodes;
    for (int t = 1; t <= degree; ++t) approx.coeffs[static_cast<std::size_t>(t)] *= 2.0 / q_nodes;
    return approx;
}

Eigen::MatrixXd chebyshev_apply(const ChebyshevApprox& approx, const Eigen::MatrixXd& m) {
    require_symmetric(m, 1e-10, "chebyshev_apply");
    const SymEvd evd = sym_evd(m);
    for (Eigen::Index i = 0; i < evd.values.size(); ++i) {
        const double v = evd.values(i);
        if (v < approx.lo - 1e-12 || v > approx.hi + 1e-12)
            throw domain_error("chebyshev_apply: eigenvalue " + std::to_string(v) +
                               " outside [" + std::to_string(approx.lo) + ", " +
                               std::to_string(approx.hi) + "]");
    }
    const Eigen::Index n = m.rows();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd rescaled =
        (2.0 * m - (approx.hi + approx.lo) * identity) / (approx.hi - approx.lo);

    Eigen::MatrixXd t_prev = identity;
    Eigen::MatrixXd acc = approx.coeffs.empty() ? Eigen::MatrixXd::Zero(n, n)
                                                : Eigen::MatrixXd(approx.coeffs[0] * identity);
    if (approx.coeffs.size() > 1) {
        Eigen::MatrixXd t_cur = rescaled;
        acc += approx.coeffs[1] * t_cur;
        for (std::size_t t = 2; t < approx.coeffs.size(); ++t) {
            Eigen::MatrixXd t_next = 2.0 * rescaled * t_cur - t_prev;
            acc += approx.coeffs[t] * t_next;
            t_prev = std::move(t_cur);
            t_cur = std::move(t_next);
        }
    }
    return 0.5 * (acc + acc.transpose());
}

double operator_norm(const Eigen::MatrixXd& symmetric) {
    if (symmetric.size() == 0) return 0.0;
    const SymEvd evd = sym_evd(symmetric);
    return evd.values.cwiseAbs().maxCoeff();
}

DecayFit thm1_decay_check(const Eigen::MatrixXd& m, double alpha, int t_max) {
    if (t_max < 0) throw contract_violation("thm1_decay_check: t_max must be >= 0");
    const SymEvd evd = sym_evd(m);
    const double lambda_min = evd.values(evd.values.size() - 1);
    const double lambda_max = evd.values(0);
    if (!(lambda_min > 0.0))
        throw domain_error("thm1_decay_check: spectrum must stay away from the branch point, "
                           "min eigenvalue " + std::to_string(lambda_min));

    const Eigen::MatrixXd exact = fractional_power(evd, alpha);

    // One recurrence pass builds every partial sum p_T(m); the error per
    // degree is the operator norm of the symmetric difference.
    const ChebyshevApprox full = chebyshev_coeffs(alpha, lambda_min, lambda_max, t_max);
    DecayFit fit;
    fit.errors.resize(static_cast<std::size_t>(t_max) + 1);
    const Eigen::Index n = m.rows();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd rescaled =
        (2.0 * m - (full.hi + full.lo) * identity) / (full.hi - full.lo);
    Eigen::MatrixXd t_prev = identity;
    Eigen::MatrixXd acc = full.coeffs[0] * identity;
    fit.errors[0] = operator_norm(exact - acc);
    if (t_max >= 1) {
        Eigen::MatrixXd t_cur = rescaled;
        for (int t = 1; t <= t_max; ++t) {
            acc += full.coeffs[static_cast<std::size_t>(t)] * t_cur;
            fit.errors[static_cast<std::size_t>(t)] = operator_norm(exact - acc);
            Eigen::MatrixXd t_next = 2.0 * rescaled * t_cur - t_prev;
            t_prev = std::move(t_cur);
            t_cur = std::move(t_next);
        }
    }

    // Log-linear least squares over the region above the noise floor.
    std::vector<int> region;
    for (int t = 0; t <= t_max; ++t)
        if (fit.errors[static_cast<std::size_t>(t)] > 1e-13) region.push_back(t);
    if (region.size() < 2) {
        fit.degenerate = true;
        fit.gamma = DecayFit::kInfGamma;
        fit.beta = region.empty() ? 0.0 : fit.errors[static_cast<std::size_t>(region[0])];
        fit.r_squared = 1.0;
        fit.envelope_ok = true;
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int t : region) {
        const double y = std::log(fit.errors[static_cast<std::size_t>(t)]);
        sx += t;
        sy += y;
        sxx += static_cast<double>(t) * t;
        sxy += t * y;
    }
    const double count = static_cast<double>(region.size());
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / count;
    fit.gamma = -slope;
    fit.beta = std::exp(intercept);
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / count;
    for (int t : region) {
        const double y = std::log(fit.errors[static_cast<std::size_t>(t)]);
        ss_res += (y - (intercept + slope * t)) * (y - (intercept + slope * t));
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.envelope_ok = true;
    for (int t : region)
        if (fit.errors[static_cast<std::size_t>(t)] >
            fit.beta * std::exp(-fit.gamma * t) * 1.05)
            fit.envelope_ok = false;
    return fit;
}

Thm2Report thm2_identity_check(const Eigen::MatrixXd& b, double alpha) {
    const SymEvd evd = sym_evd(b);
    if (evd.values(evd.values.size() - 1) < -1e-10)
        throw domain_error("thm2_identity_check: matrix must be PSD");
    Thm2Report report;
    const Eigen::MatrixXd powered = fractional_power(
        evd.values.cwiseMax(0.0), evd.vectors, alpha);
    report.lhs = operator_norm(b - powered);
    for (Eigen::Index i = 0; i < evd.values.size(); ++i) {
        const double lambda = std::max(evd.values(i), 0.0);
        report.rhs = std::max(report.rhs, std::abs(lambda - std::pow(lambda, alpha)));
    }
    report.pass = std::abs(report.lhs - report.rhs) <= 1e-8 * std::max(1.0, report.rhs);
    return report;
}

SpectralCache preprocess_graph(const Eigen::MatrixXd& adjacency, int k_large, int k_small) {
    const Eigen::MatrixXd hat = hat_transform(normalize_adjacency(adjacency));
    return truncate_evd(sym_evd(hat), k_large, k_small);
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, Eigen::Index expect_cols = -1) {
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : std::max<Eigen::Index>(expect_cols, 0);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
    return m;
}

constexpr int kCacheFormatVersion = 1;

}  // namespace

void save_cache_file(const std::filesystem::path& file, std::uint64_t dataset_hash, int k_large,
                     int k_small, const std::vector<SpectralCache>& caches) {
    nlohmann::json doc;
    doc["format_version"] = kCacheFormatVersion;
    doc["dataset_hash"] = dataset_hash;
    doc["k_l"] = k_large;
    doc["k_s"] = k_small;
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t id = 0; id < caches.size(); ++id) {
        const SpectralCache& c = caches[id];
        nlohmann::json e;
        e["id"] = id;
        e["lambda_l"] = std::vector<double>(c.lambda_large.data(),
                                            c.lambda_large.data() + c.lambda_large.size());
        e["lambda_s"] = std::vector<double>(c.lambda_small.data(),
                                            c.lambda_small.data() + c.lambda_small.size());
        e["u_l"] = matrix_to_json(c.u_large);
        e["u_s"] = matrix_to_json(c.u_small);
        entries.push_back(std::move(e));
    }
    doc["entries"] = std::move(entries);
    std::ofstream out(file);
    if (!out) throw format_error("cannot write cache file " + file.string());
    out << doc.dump();
}

bool load_cache_file(const std::filesystem::path& file, std::uint64_t dataset_hash, int k_large,
                     int k_small, std::vector<SpectralCache>& caches) {
    std::ifstream in(file);
    if (!in) return false;
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception&) {
        return false;
    }
    if (doc.value("format_version", -1) != kCacheFormatVersion) return false;
    if (doc.value("dataset_hash", std::uint64_t{0}) != dataset_hash) return false;
    if (doc.value("k_l", -1) != k_large || doc.value("k_s", -1) != k_small) return false;
    std::vector<SpectralCache> loaded(doc["entries"].size());
    for (const auto& e : doc["entries"]) {
        const std::size_t id = e["id"].get<std::size_t>();
        if (id >= loaded.size()) return false;
        SpectralCache& c = loaded[id];
        const auto ll = e["lambda_l"].get<std::vector<double>>();
        const auto ls = e["lambda_s"].get<std::vector<double>>();
        c.lambda_large = Eigen::Map<const Eigen::VectorXd>(ll.data(), static_cast<long>(ll.size()));
        c.lambda_small = Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<long>(ls.size()));
        c.u_large = matrix_from_json(e["u_l"]);
        c.u_small = matrix_from_json(e["u_s"], static_cast<Eigen::Index>(ls.size()));
    }
    caches = std::move(loaded);
    return true;
}

}  // namespace fracaug
