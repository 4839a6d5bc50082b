#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stentx/features.hpp"

namespace stentx {

struct LassoPathEntry {
    double lambda = 0;
    std::vector<std::string> active_set;
};

struct LassoModel {
    double lambda = 0;
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;  // original column scale
    double intercept = 0;
    std::vector<std::string> active_set;  // schema order
    std::vector<LassoPathEntry> path;     // decreasing lambda
    std::vector<double> cv_mse;           // per path entry; empty without CV
};

struct LassoOptions {
    double tolerance = 1e-7;  // max coefficient change per sweep
    int max_sweeps = 100000;
    int cv_folds = 5;
    int default_grid_size = 50;
    double default_grid_ratio = 1e-3;
};

/// Coefficients for each lambda of a decreasing grid, on the original column
/// scale; columns are standardized internally (population SD) and the
/// objective is (1/2n)|y - Xb|^2 + lambda |b|_1 in standardized units.
/// Constant columns stay at 0.
struct LassoPath {
    std::vector<double> lambdas;
    std::vector<Eigen::VectorXd> coefficients;
    std::vector<double> intercepts;
};
LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const double> lambdas,
                     const LassoOptions& opt = {});

/// max_j |x_j' (y - mean y)| / n over standardized columns.
double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Log-spaced grid from lambda_max down to ratio * lambda_max.
std::vector<double> default_lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int size, double ratio);

/// Fits the path on all rows and picks lambda by grouped k-fold CV (minimum
/// mean squared error, ties to the larger lambda). An empty grid uses
/// default_lambda_grid. Throws std::invalid_argument on non-finite input or
/// a grid that is not strictly decreasing.
LassoModel fit_lasso(const FeatureMatrix& x, std::span<const double> lambda_grid, std::uint64_t seed,
                     const LassoOptions& opt = {});

/// Columns by first entry into the active set along the path; ties broken
/// by |coefficient| at the selected lambda, then schema order. Columns that
/// never enter follow in schema order.
std::vector<std::string> rank_features(const LassoModel& model);

}  // namespace stentx
