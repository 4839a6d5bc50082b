#include "stentx/tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "stentx/rng.hpp"

namespace stentx {

namespace {

struct Grower {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& y;
    TreeOptions opt;
    std::vector<TreeNode> nodes;

    int grow(std::vector<std::size_t>& rows, int depth) {
        const auto n = rows.size();
        double sum = 0;
        for (auto r : rows) sum += y(static_cast<Eigen::Index>(r));
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[static_cast<std::size_t>(id)].value = sum / static_cast<double>(n);
        if (depth >= opt.max_depth || n < 2 * static_cast<std::size_t>(opt.min_leaf)) return id;

        const double parent = sum * sum / static_cast<double>(n);
        double best_gain = 0;
        int best_feature = -1;
        double best_threshold = 0;
        std::vector<std::size_t> sorted(rows);
        const auto min_leaf = static_cast<std::size_t>(opt.min_leaf);
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            auto xv = [&](std::size_t r) { return x(static_cast<Eigen::Index>(r), j); };
            std::stable_sort(sorted.begin(), sorted.end(), [&](auto a, auto b) { return xv(a) < xv(b); });
            double left = 0;
            for (std::size_t i = 1; i < n; ++i) {
                left += y(static_cast<Eigen::Index>(sorted[i - 1]));
                if (i < min_leaf || n - i < min_leaf) continue;
                const double lo = xv(sorted[i - 1]), hi = xv(sorted[i]);
                if (!(lo < hi)) continue;
                const double right = sum - left;
                const double gain = left * left / static_cast<double>(i) +
                                    right * right / static_cast<double>(n - i) - parent;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(j);
                    const double mid = 0.5 * (lo + hi);
                    best_threshold = mid < hi ? mid : lo;
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> l, r;
        for (auto row : rows)
            (x(static_cast<Eigen::Index>(row), best_feature) <= best_threshold ? l : r).push_back(row);
        rows.clear();
        rows.shrink_to_fit();
        const int li = grow(l, depth + 1);
        const int ri = grow(r, depth + 1);
        auto& node = nodes[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = li;
        node.right = ri;
        return id;
    }
};

}  // namespace

double TreeModel::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

Eigen::VectorXd TreeModel::predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict_row(x.row(i));
    return out;
}

TreeModel fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const std::size_t> rows,
                   const TreeOptions& opt) {
    if (rows.empty()) throw std::invalid_argument("fit_tree needs at least one row");
    if (opt.min_leaf < 1 || opt.max_depth < 0) throw std::invalid_argument("invalid tree options");
    Grower g{x, y, opt, {}};
    std::vector<std::size_t> r(rows.begin(), rows.end());
    g.grow(r, 0);
    return TreeModel{std::move(g.nodes)};
}

Eigen::VectorXd BaggedModel::predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (const auto& t : trees) out += t.predict(x);
    return out / static_cast<double>(trees.size());
}

BaggedModel fit_bagged(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int n_trees, std::uint64_t seed,
                       const TreeOptions& opt) {
    if (n_trees < 1) throw std::invalid_argument("bagged model needs at least one tree");
    const auto n = static_cast<std::size_t>(x.rows());
    BaggedModel m;
    std::vector<std::size_t> rows(n);
    for (int t = 0; t < n_trees; ++t) {
        const auto s = derive_seed(seed, static_cast<std::uint64_t>(t));
        Rng rng(s);
        for (auto& r : rows) r = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
        std::sort(rows.begin(), rows.end());
        m.trees.push_back(fit_tree(x, y, rows, opt));
        m.seeds.push_back(s);
    }
    return m;
}

}  // namespace stentx
