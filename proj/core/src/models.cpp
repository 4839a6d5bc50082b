#include "stentx/models.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "binio.hpp"

namespace stentx {

std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::linear: return "linear";
        case ModelKind::gpr: return "gpr";
        case ModelKind::tree: return "tree";
        case ModelKind::bagged: return "bagged";
    }
    return "linear";
}

ModelKind parse_model_kind(std::string_view s) {
    if (s == "linear") return ModelKind::linear;
    if (s == "gpr") return ModelKind::gpr;
    if (s == "tree") return ModelKind::tree;
    if (s == "bagged") return ModelKind::bagged;
    throw std::invalid_argument("unknown model kind '" + std::string(s) + "'");
}

LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge) {
    const Eigen::VectorXd mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd xc = x.rowwise() - mean.transpose();
    const double ybar = y.mean();
    Eigen::MatrixXd a = xc.transpose() * xc;
    a.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("linear model: singular design");
    LinearModel m;
    m.weights = ldlt.solve(xc.transpose() * (y.array() - ybar).matrix());
    if (!m.weights.allFinite()) throw std::runtime_error("linear model: singular design");
    m.intercept = ybar - mean.dot(m.weights);
    return m;
}

namespace {

Eigen::VectorXd predict_values(const RegressionModel& model, const Eigen::MatrixXd& x) {
    return std::visit(
        [&](const auto& p) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return (x * p.weights).array() + p.intercept;
            } else if constexpr (std::is_same_v<T, GprModel>) {
                return gpr_predict(p, x);
            } else {
                return p.predict(x);
            }
        },
        model.params);
}

}  // namespace

RegressionModel fit_model(ModelKind kind, const FeatureMatrix& x, const ModelConfig& config, std::uint64_t seed) {
    const Eigen::VectorXd y = x.target_vector();
    if (x.rows() < 1) throw std::invalid_argument("fit_model: no training rows");
    if (!x.values.allFinite() || !y.allFinite()) throw std::invalid_argument("fit_model: non-finite training data");
    if ((kind == ModelKind::tree || kind == ModelKind::bagged) && x.rows() < 5)
        throw std::invalid_argument("tree models need at least 5 rows");

    RegressionModel m;
    m.kind = kind;
    m.feature_names = x.schema.names();
    m.schema_fingerprint = x.schema.fingerprint();
    switch (kind) {
        case ModelKind::linear: m.params = fit_linear(x.values, y, config.ridge); break;
        case ModelKind::gpr: m.params = fit_gpr(x.values, y, config.gpr, seed); break;
        case ModelKind::tree: {
            std::vector<std::size_t> rows(x.rows());
            std::iota(rows.begin(), rows.end(), 0);
            m.params = fit_tree(x.values, y, rows, config.tree);
            break;
        }
        case ModelKind::bagged: m.params = fit_bagged(x.values, y, config.bagged_trees, seed, config.tree); break;
    }
    const Eigen::VectorXd fitted = predict_values(m, x.values);
    m.training_rmse = std::sqrt((fitted - y).squaredNorm() / static_cast<double>(y.size()));
    return m;
}

Eigen::VectorXd predict(const RegressionModel& model, const FeatureMatrix& x) {
    if (x.schema.fingerprint() != model.schema_fingerprint)
        throw std::invalid_argument("feature schema does not match the fitted model");
    return predict_values(model, x.values);
}

namespace {

constexpr char kMagic[4] = {'S', 'T', 'X', 'R'};
constexpr std::uint64_t kVersion = 1;

void write_tree(std::ostream& out, const TreeModel& t) {
    using namespace binio;
    put_u64(out, t.nodes.size());
    for (const auto& n : t.nodes) {
        put_i64(out, n.feature);
        put_f64(out, n.threshold);
        put_i64(out, n.left);
        put_i64(out, n.right);
        put_f64(out, n.value);
    }
}

TreeModel read_tree(std::istream& in) {
    using namespace binio;
    TreeModel t;
    t.nodes.resize(get_size(in));
    for (auto& n : t.nodes) {
        n.feature = static_cast<int>(get_i64(in));
        n.threshold = get_f64(in);
        n.left = static_cast<int>(get_i64(in));
        n.right = static_cast<int>(get_i64(in));
        n.value = get_f64(in);
    }
    const auto size = static_cast<int>(t.nodes.size());
    for (const auto& n : t.nodes)
        if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size))
            throw DataError("corrupt tree in model file");
    if (t.nodes.empty()) throw DataError("corrupt tree in model file");
    return t;
}

void write_hyper(std::ostream& out, const GprHyper& h) {
    binio::put_f64(out, h.length_scale);
    binio::put_f64(out, h.signal_variance);
    binio::put_f64(out, h.noise_variance);
}

GprHyper read_hyper(std::istream& in) {
    GprHyper h;
    h.length_scale = binio::get_f64(in);
    h.signal_variance = binio::get_f64(in);
    h.noise_variance = binio::get_f64(in);
    return h;
}

}  // namespace

void write_model(const RegressionModel& m, std::ostream& out) {
    using namespace binio;
    out.write(kMagic, 4);
    put_u64(out, kVersion);
    put_u64(out, static_cast<std::uint64_t>(m.kind));
    put_strs(out, m.feature_names);
    put_u64(out, m.schema_fingerprint);
    put_f64(out, m.training_rmse);
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                put_vec(out, p.weights);
                put_f64(out, p.intercept);
            } else if constexpr (std::is_same_v<T, GprModel>) {
                write_hyper(out, p.hyper);
                put_f64(out, p.mean);
                put_f64(out, p.jitter);
                put_f64(out, p.lml);
                put_vec(out, p.input_mean);
                put_vec(out, p.input_scale);
                put_mat(out, p.inputs);
                put_vec(out, p.alpha);
                put_u64(out, p.starts.size());
                for (const auto& s : p.starts) {
                    write_hyper(out, s.initial);
                    write_hyper(out, s.best);
                    put_f64(out, s.initial_lml);
                    put_f64(out, s.best_lml);
                    put_doubles(out, s.trace);
                }
            } else if constexpr (std::is_same_v<T, TreeModel>) {
                write_tree(out, p);
            } else {
                put_u64(out, p.trees.size());
                for (std::size_t t = 0; t < p.trees.size(); ++t) {
                    put_u64(out, p.seeds[t]);
                    write_tree(out, p.trees[t]);
                }
            }
        },
        m.params);
    if (!out) throw std::runtime_error("failed to write model");
}

RegressionModel read_model(std::istream& in) {
    using namespace binio;
    char magic[4];
    if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw DataError("not a stentx model file");
    if (const auto v = get_u64(in); v != kVersion)
        throw DataError("unsupported model file version " + std::to_string(v));
    RegressionModel m;
    const auto kind = get_u64(in);
    if (kind > static_cast<std::uint64_t>(ModelKind::bagged)) throw DataError("unknown model kind in file");
    m.kind = static_cast<ModelKind>(kind);
    m.feature_names = get_strs(in);
    m.schema_fingerprint = get_u64(in);
    m.training_rmse = get_f64(in);
    const auto p = static_cast<Eigen::Index>(m.feature_names.size());
    switch (m.kind) {
        case ModelKind::linear: {
            LinearModel l;
            l.weights = get_vec(in);
            l.intercept = get_f64(in);
            if (l.weights.size() != p) throw DataError("model weights do not match its feature list");
            m.params = std::move(l);
            break;
        }
        case ModelKind::gpr: {
            GprModel g;
            g.hyper = read_hyper(in);
            g.mean = get_f64(in);
            g.jitter = get_f64(in);
            g.lml = get_f64(in);
            g.input_mean = get_vec(in);
            g.input_scale = get_vec(in);
            g.inputs = get_mat(in);
            g.alpha = get_vec(in);
            g.starts.resize(get_size(in, 1 << 16));
            for (auto& s : g.starts) {
                s.initial = read_hyper(in);
                s.best = read_hyper(in);
                s.initial_lml = get_f64(in);
                s.best_lml = get_f64(in);
                s.trace = get_doubles(in);
            }
            if (g.input_mean.size() != p || g.input_scale.size() != p || g.inputs.cols() != p ||
                g.alpha.size() != g.inputs.rows())
                throw DataError("GPR parameters do not match its feature list");
            m.params = std::move(g);
            break;
        }
        case ModelKind::tree: m.params = read_tree(in); break;
        case ModelKind::bagged: {
            BaggedModel b;
            const auto n = get_size(in, 1 << 20);
            for (std::uint64_t t = 0; t < n; ++t) {
                b.seeds.push_back(get_u64(in));
                b.trees.push_back(read_tree(in));
            }
            if (b.trees.empty()) throw DataError("bagged model without trees");
            m.params = std::move(b);
            break;
        }
    }
    return m;
}

}  // namespace stentx
