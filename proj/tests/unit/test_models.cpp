#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "stentx/models.hpp"
#include "stentx/rng.hpp"

namespace stentx {
namespace {

FeatureMatrix table(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    std::vector<FeatureColumn> cols;
    for (Eigen::Index j = 0; j < x.cols(); ++j) cols.push_back({"f" + std::to_string(j), ColumnGroup::lumen2d, false});
    FeatureMatrix m;
    m.schema = FeatureSchema(cols);
    m.values = x;
    m.target.assign(y.data(), y.data() + y.size());
    m.group_id.assign(static_cast<std::size_t>(y.size()), "P");
    m.lesion_id.assign(static_cast<std::size_t>(y.size()), "L");
    m.frame_index.assign(static_cast<std::size_t>(y.size()), 0);
    return m;
}

FeatureMatrix noisy_table(std::uint64_t seed, int n) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = uniform(rng, 0, 1);
        y(i) = 3 * x(i, 0) + (x(i, 1) > 0.5 ? 1 : 0) + 0.1 * standard_normal(rng);
    }
    return table(x, y);
}

TEST(Linear, RecoversLine) {
    Eigen::MatrixXd x(5, 1);
    x << 0, 1, 2, 3, 4;
    const Eigen::VectorXd y = (2 * x.col(0)).array() + 1;
    const auto m = fit_model(ModelKind::linear, table(x, y), ModelConfig{}, 1);
    const auto& p = std::get<LinearModel>(m.params);
    EXPECT_NEAR(p.weights(0), 2, 1e-6);
    EXPECT_NEAR(p.intercept, 1, 1e-6);
    EXPECT_NEAR(m.training_rmse, 0, 1e-6);
}

TEST(Linear, CollinearColumnsStaySolvable) {
    Eigen::MatrixXd x(6, 2);
    x << 0, 0, 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
    const Eigen::VectorXd y = x.col(0);
    const auto p = fit_linear(x, y, 1e-8);
    EXPECT_LT(((x * p.weights).array() + p.intercept - y.array()).abs().maxCoeff(), 1e-5);
}

TEST(Tree, SingleLeafWhenSplitsAreTooSmall) {
    Eigen::MatrixXd x(8, 1);
    x << 0, 1, 2, 3, 4, 5, 6, 7;
    Eigen::VectorXd y(8);
    y << 1, 1, 1, 1, 9, 9, 9, 9;
    TreeOptions opt;
    opt.min_leaf = 5;
    const std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5, 6, 7};
    const auto t = fit_tree(x, y, rows, opt);
    ASSERT_EQ(t.nodes.size(), 1u);
    EXPECT_EQ(t.nodes[0].value, 5);
    opt.min_leaf = 4;
    const auto split = fit_tree(x, y, rows, opt);
    ASSERT_EQ(split.nodes.size(), 3u);
    EXPECT_EQ(split.nodes[0].threshold, 3.5);
    EXPECT_EQ(split.predict(x), y);
}

TEST(Tree, RespectsMinLeafAndDepth) {
    const auto m = noisy_table(3, 200);
    TreeOptions opt;
    opt.min_leaf = 7;
    opt.max_depth = 3;
    std::vector<std::size_t> rows(200);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto t = fit_tree(m.values, m.target_vector(), rows, opt);
    std::vector<int> count(t.nodes.size(), 0);
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        int node = 0;
        int depth = 0;
        while (t.nodes[static_cast<std::size_t>(node)].feature >= 0) {
            const auto& n = t.nodes[static_cast<std::size_t>(node)];
            node = m.values(i, n.feature) <= n.threshold ? n.left : n.right;
            ++depth;
        }
        ++count[static_cast<std::size_t>(node)];
        EXPECT_LE(depth, 3);
    }
    for (std::size_t k = 0; k < t.nodes.size(); ++k)
        if (t.nodes[k].feature < 0) EXPECT_GE(count[k], 7);
}

TEST(Bagged, ConstantTargetGivesIdenticalTrees) {
    Rng rng(4);
    Eigen::MatrixXd x(30, 2);
    for (int i = 0; i < 30; ++i) x.row(i) << uniform01(rng), uniform01(rng);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 2.5);
    const auto b = fit_bagged(x, y, 10, 1);
    ASSERT_EQ(b.trees.size(), 10u);
    for (const auto& t : b.trees) EXPECT_EQ(t.nodes.size(), 1u);
    EXPECT_EQ(b.predict(x), y);
}

TEST(Bagged, SeedsFollowDerivation) {
    const auto m = noisy_table(5, 60);
    const auto a = fit_bagged(m.values, m.target_vector(), 4, 17);
    for (std::uint64_t t = 0; t < 4; ++t) EXPECT_EQ(a.seeds[t], derive_seed(17, t));
    const auto b = fit_bagged(m.values, m.target_vector(), 4, 17);
    EXPECT_EQ(a.predict(m.values), b.predict(m.values));
}

class Roundtrip : public ::testing::TestWithParam<ModelKind> {};

TEST_P(Roundtrip, SerializedModelPredictsIdentically) {
    const auto m = noisy_table(6, 80);
    ModelConfig cfg;
    cfg.bagged_trees = 8;
    cfg.gpr.starts = 2;
    const auto model = fit_model(GetParam(), m, cfg, 21);
    std::stringstream buf;
    write_model(model, buf);
    const auto back = read_model(buf);
    EXPECT_EQ(back.kind, model.kind);
    EXPECT_EQ(back.feature_names, model.feature_names);
    EXPECT_EQ(back.schema_fingerprint, model.schema_fingerprint);
    EXPECT_EQ(predict(back, m), predict(model, m));
    std::stringstream again;
    write_model(back, again);
    std::stringstream first;
    write_model(model, first);
    EXPECT_EQ(again.str(), first.str());
}

INSTANTIATE_TEST_SUITE_P(Kinds, Roundtrip,
                         ::testing::Values(ModelKind::linear, ModelKind::gpr, ModelKind::tree, ModelKind::bagged));

TEST(Models, SchemaMismatchRejected) {
    const auto m = noisy_table(7, 40);
    const auto model = fit_model(ModelKind::linear, m, ModelConfig{}, 1);
    const std::vector<std::string> reordered{"f1", "f0", "f2"};
    EXPECT_THROW(predict(model, m.select_columns(reordered)), std::invalid_argument);
}

TEST(Models, CorruptStreamRejected) {
    std::stringstream bad("not a model");
    EXPECT_ANY_THROW(read_model(bad));
    const auto model = fit_model(ModelKind::tree, noisy_table(8, 30), ModelConfig{}, 1);
    std::stringstream buf;
    write_model(model, buf);
    auto bytes = buf.str();
    bytes.resize(bytes.size() / 2);
    std::stringstream truncated(bytes);
    EXPECT_ANY_THROW(read_model(truncated));
}

TEST(Models, InputValidation) {
    auto m = noisy_table(9, 4);
    EXPECT_THROW(fit_model(ModelKind::tree, m, ModelConfig{}, 1), std::invalid_argument);
    m.values(0, 0) = std::nan("");
    EXPECT_THROW(fit_model(ModelKind::linear, m, ModelConfig{}, 1), std::invalid_argument);
    EXPECT_THROW(parse_model_kind("forest"), std::invalid_argument);
    for (auto k : {ModelKind::linear, ModelKind::gpr, ModelKind::tree, ModelKind::bagged})
        EXPECT_EQ(parse_model_kind(to_string(k)), k);
}

}  // namespace
}  // namespace stentx
