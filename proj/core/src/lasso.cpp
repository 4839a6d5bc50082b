#include "stentx/lasso.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "stentx/splits.hpp"

namespace stentx {

namespace {

struct Standardized {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;  // population SD, 0 for constant columns
    Eigen::MatrixXd gram;   // Xs' Xs / n
    Eigen::VectorXd xty;    // Xs' (y - ybar) / n
    double ybar = 0;
};

Standardized standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const auto n = static_cast<double>(x.rows());
    Standardized s;
    s.mean = x.colwise().mean().transpose();
    Eigen::MatrixXd xs = x.rowwise() - s.mean.transpose();
    s.scale = (xs.colwise().squaredNorm() / n).cwiseSqrt().transpose();
    for (Eigen::Index j = 0; j < xs.cols(); ++j) {
        if (s.scale(j) > 0) {
            xs.col(j) /= s.scale(j);
        } else {
            xs.col(j).setZero();
        }
    }
    s.ybar = y.mean();
    s.gram = xs.transpose() * xs / n;
    s.xty = xs.transpose() * (y.array() - s.ybar).matrix() / n;
    return s;
}

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

// Coordinate descent with covariance updates; b is warm-started in place.
// Full sweeps alternate with sweeps over the nonzero set until a full sweep
// changes nothing by more than the tolerance.
void descend(const Standardized& s, double lambda, Eigen::VectorXd& b, const LassoOptions& opt) {
    const auto p = b.size();
    auto update = [&](Eigen::Index j) {
        const double g = s.gram(j, j);
        const double z = s.xty(j) - s.gram.col(j).dot(b) + g * b(j);
        const double nb = soft_threshold(z, lambda) / g;
        const double change = std::abs(nb - b(j));
        b(j) = nb;
        return change;
    };
    std::vector<Eigen::Index> active;
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        double max_change = 0;
        active.clear();
        for (Eigen::Index j = 0; j < p; ++j) {
            if (s.scale(j) == 0) continue;
            max_change = std::max(max_change, update(j));
            if (b(j) != 0) active.push_back(j);
        }
        if (max_change < opt.tolerance) return;
        for (int inner = 0; inner < opt.max_sweeps; ++inner) {
            double inner_change = 0;
            for (auto j : active) inner_change = std::max(inner_change, update(j));
            if (inner_change < opt.tolerance) break;
        }
    }
}

void check_finite(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("LASSO input contains non-finite values");
}

void check_grid(std::span<const double> lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("empty lambda grid");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] >= 0) || !std::isfinite(lambdas[i]))
            throw std::invalid_argument("lambda values must be finite and non-negative");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw std::invalid_argument("lambda grid must be decreasing");
    }
}

}  // namespace

double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return standardize(x, y).xty.cwiseAbs().maxCoeff();
}

std::vector<double> default_lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int size, double ratio) {
    const double top = lambda_max(x, y);
    if (!(top > 0)) return {0.0};
    std::vector<double> grid;
    for (int i = 0; i < size; ++i)
        grid.push_back(top * std::pow(ratio, static_cast<double>(i) / std::max(1, size - 1)));
    return grid;
}

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const double> lambdas,
                     const LassoOptions& opt) {
    if (x.rows() < 2) throw std::invalid_argument("LASSO needs at least 2 rows");
    check_finite(x, y);
    check_grid(lambdas);
    const auto s = standardize(x, y);
    LassoPath path;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(x.cols());
    for (double lambda : lambdas) {
        descend(s, lambda, b, opt);
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (s.scale(j) > 0) coef(j) = b(j) / s.scale(j);
        path.lambdas.push_back(lambda);
        path.intercepts.push_back(s.ybar - s.mean.dot(coef));
        path.coefficients.push_back(std::move(coef));
    }
    return path;
}

LassoModel fit_lasso(const FeatureMatrix& m, std::span<const double> lambda_grid, std::uint64_t seed,
                     const LassoOptions& opt) {
    const Eigen::MatrixXd& x = m.values;
    const Eigen::VectorXd y = m.target_vector();
    check_finite(x, y);
    std::vector<double> grid(lambda_grid.begin(), lambda_grid.end());
    if (grid.empty()) grid = default_lambda_grid(x, y, opt.default_grid_size, opt.default_grid_ratio);
    check_grid(grid);

    LassoModel model;
    model.names = m.schema.names();
    const auto full = lasso_path(x, y, grid, opt);

    std::size_t chosen = grid.size() - 1;
    std::size_t groups = 0;
    {
        auto ids = m.group_id;
        std::sort(ids.begin(), ids.end());
        groups = static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
    }
    const int k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(opt.cv_folds), groups));
    if (k >= 2) {
        const auto folds = split_grouped_kfold(m.group_id, k, seed);
        model.cv_mse.assign(grid.size(), 0.0);
        for (int f = 0; f < k; ++f) {
            const auto tr = folds.train_indices(f);
            const auto va = folds.validation_indices(f);
            if (tr.size() < 2) continue;
            Eigen::MatrixXd xt(static_cast<Eigen::Index>(tr.size()), x.cols());
            Eigen::VectorXd yt(static_cast<Eigen::Index>(tr.size()));
            for (std::size_t i = 0; i < tr.size(); ++i) {
                xt.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(tr[i]));
                yt(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(tr[i]));
            }
            const auto p = lasso_path(xt, yt, grid, opt);
            for (std::size_t l = 0; l < grid.size(); ++l) {
                double sse = 0;
                for (auto i : va) {
                    const auto r = static_cast<Eigen::Index>(i);
                    const double e = y(r) - p.intercepts[l] - x.row(r).dot(p.coefficients[l]);
                    sse += e * e;
                }
                model.cv_mse[l] += sse / static_cast<double>(m.rows());
            }
        }
        chosen = 0;
        for (std::size_t l = 1; l < grid.size(); ++l)
            if (model.cv_mse[l] < model.cv_mse[chosen]) chosen = l;
    }

    for (std::size_t l = 0; l < grid.size(); ++l) {
        LassoPathEntry e{grid[l], {}};
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (full.coefficients[l](j) != 0) e.active_set.push_back(model.names[static_cast<std::size_t>(j)]);
        model.path.push_back(std::move(e));
    }
    model.lambda = grid[chosen];
    model.coefficients = full.coefficients[chosen];
    model.intercept = full.intercepts[chosen];
    model.active_set = model.path[chosen].active_set;
    return model;
}

std::vector<std::string> rank_features(const LassoModel& model) {
    const auto p = model.names.size();
    constexpr auto kNever = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> entry(p, kNever);
    for (std::size_t l = 0; l < model.path.size(); ++l)
        for (const auto& name : model.path[l].active_set) {
            const auto j = static_cast<std::size_t>(
                std::find(model.names.begin(), model.names.end(), name) - model.names.begin());
            if (j < p) entry[j] = std::min(entry[j], l);
        }
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (entry[a] != entry[b]) return entry[a] < entry[b];
        if (entry[a] == kNever) return false;
        return std::abs(model.coefficients(static_cast<Eigen::Index>(a))) >
               std::abs(model.coefficients(static_cast<Eigen::Index>(b)));
    });
    std::vector<std::string> out;
    for (auto j : order) out.push_back(model.names[j]);
    return out;
}

}  // namespace stentx
