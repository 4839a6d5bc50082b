#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

namespace stentx {

struct GprHyper {
    double length_scale = 1;
    double signal_variance = 1;
    double noise_variance = 1e-2;
};

/// One optimizer start: where it began and the best log marginal
/// likelihood seen after each evaluation.
struct GprStart {
    GprHyper initial;
    GprHyper best;
    double initial_lml = 0;
    double best_lml = 0;
    std::vector<double> trace;
};

struct GprOptions {
    /// Pins the noise variance instead of optimizing it.
    std::optional<double> noise_variance;
    int starts = 5;
    int max_evaluations = 150;  // per start
    /// Rows kept in the predictor and in the hyperparameter search; larger
    /// training sets are subsampled with the fit seed.
    int max_active_rows = 1500;
    int max_search_rows = 300;
};

/// Constant-mean GP with an isotropic squared-exponential kernel on
/// z-scored inputs.
struct GprModel {
    GprHyper hyper;
    double mean = 0;
    double jitter = 0;  // extra diagonal needed for the final factorization
    double lml = 0;     // on the search rows
    Eigen::VectorXd input_mean;
    Eigen::VectorXd input_scale;
    Eigen::MatrixXd inputs;  // z-scored active rows
    Eigen::VectorXd alpha;
    std::vector<GprStart> starts;
};

/// Rows are put in a canonical order first, so the fit does not depend on
/// the order of the training rows. Throws std::runtime_error when the kernel
/// matrix stays indefinite after jitter reaches 1e-4.
GprModel fit_gpr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GprOptions& opt, std::uint64_t seed);

Eigen::VectorXd gpr_predict(const GprModel& m, const Eigen::MatrixXd& x);

/// log p(y | X, hyper) for centered targets on already-scaled inputs;
/// -inf when the kernel matrix cannot be factorized.
double gpr_log_marginal_likelihood(const Eigen::MatrixXd& sq_dist, const Eigen::VectorXd& y_centered,
                                   const GprHyper& h);

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace stentx
