#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace stentx {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;  // x[feature] <= threshold
    int right = -1;
    double value = 0;
};

struct TreeOptions {
    int min_leaf = 5;
    int max_depth = 12;
};

/// CART regression tree grown by variance reduction.
struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// Grows a tree on the listed rows (repeats allowed, as in a bootstrap).
/// Split thresholds are midpoints between adjacent distinct values.
TreeModel fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const std::size_t> rows,
                   const TreeOptions& opt = {});

struct BaggedModel {
    std::vector<TreeModel> trees;
    std::vector<std::uint64_t> seeds;  // bootstrap seed per tree

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// Tree t is grown on a bootstrap drawn with derive_seed(seed, t).
BaggedModel fit_bagged(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int n_trees, std::uint64_t seed,
                       const TreeOptions& opt = {});

}  // namespace stentx
