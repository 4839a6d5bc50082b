#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stentx/features.hpp"
#include "stentx/gpr.hpp"
#include "stentx/tree.hpp"

namespace stentx {

enum class ModelKind { linear, gpr, tree, bagged };
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct LinearModel {
    Eigen::VectorXd weights;
    double intercept = 0;
};

struct ModelConfig {
    double ridge = 1e-8;
    GprOptions gpr;
    TreeOptions tree;
    int bagged_trees = 100;
};

struct RegressionModel {
    ModelKind kind = ModelKind::linear;
    std::vector<std::string> feature_names;
    std::uint64_t schema_fingerprint = 0;
    double training_rmse = 0;
    std::variant<LinearModel, GprModel, TreeModel, BaggedModel> params;
};

/// Throws std::invalid_argument on non-finite input or too few rows
/// (tree/bagged need 5) and std::runtime_error when the design cannot be
/// solved.
RegressionModel fit_model(ModelKind kind, const FeatureMatrix& x, const ModelConfig& config, std::uint64_t seed);

/// Throws std::invalid_argument when the schema fingerprint differs.
Eigen::VectorXd predict(const RegressionModel& model, const FeatureMatrix& x);

/// Centered least squares with a ridge term on the weights.
LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge);

void write_model(const RegressionModel& model, std::ostream& out);
RegressionModel read_model(std::istream& in);

}  // namespace stentx
