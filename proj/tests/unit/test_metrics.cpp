#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stentx/metrics.hpp"
#include "stentx/rng.hpp"

namespace stentx {
namespace {

double mann_whitney(const std::vector<double>& s, const std::vector<int>& l) {
    double u = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (l[i]) ++pos; else ++neg;
        if (!l[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (l[j]) continue;
            if (s[i] > s[j]) u += 1;
            else if (s[i] == s[j]) u += 0.5;
        }
    }
    return u / (pos * neg);
}

TEST(RegressionMetrics, Perfect) {
    const std::vector<double> a{1, 2, 3, 4};
    const auto m = regression_metrics(a, a);
    EXPECT_EQ(m.rmse_mm2, 0);
    EXPECT_DOUBLE_EQ(m.pearson_r, 1);
    EXPECT_EQ(m.bias_mm2, 0);
}

TEST(RegressionMetrics, ShiftedByOne) {
    const std::vector<double> a{1, 2, 3}, p{2, 3, 4};
    const auto m = regression_metrics(a, p);
    EXPECT_DOUBLE_EQ(m.bias_mm2, 1);
    EXPECT_DOUBLE_EQ(m.rmse_mm2, 1);
    EXPECT_DOUBLE_EQ(m.pearson_r, 1);
    EXPECT_NEAR(m.residual_sd_mm2, 0, 1e-15);
    EXPECT_EQ(m.n, 3u);
}

TEST(RegressionMetrics, AntiCorrelated) {
    const std::vector<double> a{-2, -1, 0, 1, 2}, p{2, 1, 0, -1, -2};
    EXPECT_DOUBLE_EQ(regression_metrics(a, p).pearson_r, -1);
}

TEST(RegressionMetrics, ZeroVarianceFlagsPearson) {
    const std::vector<double> a{3, 3, 3}, p{1, 2, 3};
    const auto m = regression_metrics(a, p);
    EXPECT_TRUE(m.pearson_undefined);
    EXPECT_EQ(m.pearson_r, 0);
}

TEST(RegressionMetrics, RejectsBadLengths) {
    const std::vector<double> a{1, 2}, p{1};
    EXPECT_THROW(regression_metrics(a, p), std::invalid_argument);
    EXPECT_THROW(regression_metrics({}, {}), std::invalid_argument);
}

TEST(RocAuc, PerfectSeparation) {
    const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
    const std::vector<int> l{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(roc_auc(s, l).auc, 1.0);
}

TEST(RocAuc, CompleteTie) {
    const std::vector<double> s{0.5, 0.5};
    const std::vector<int> l{1, 0};
    EXPECT_DOUBLE_EQ(roc_auc(s, l).auc, 0.5);
}

TEST(RocAuc, TwoOfFourPairsConcordant) {
    const std::vector<double> s{0.8, 0.7, 0.3, 0.4};
    const std::vector<int> l{1, 0, 1, 0};
    EXPECT_DOUBLE_EQ(roc_auc(s, l).auc, 0.5);
}

TEST(RocAuc, SingleClassThrows) {
    const std::vector<double> s{0.1, 0.2};
    const std::vector<int> l{1, 1};
    EXPECT_THROW(roc_auc(s, l), std::invalid_argument);
}

TEST(RocAuc, CurveEndpointsAndMonotone) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 40));
        std::vector<double> s(n);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(uniform_int(rng, 0, 8));
            l[i] = static_cast<int>(i % 2);
        }
        const auto roc = roc_auc(s, l);
        ASSERT_EQ(roc.points.front(), std::make_pair(0.0, 0.0));
        ASSERT_EQ(roc.points.back(), std::make_pair(1.0, 1.0));
        for (std::size_t i = 1; i < roc.points.size(); ++i) {
            ASSERT_GE(roc.points[i].first, roc.points[i - 1].first);
            ASSERT_GE(roc.points[i].second, roc.points[i - 1].second);
        }
    }
}

TEST(RocAuc, EqualsMannWhitneyWithTies) {
    Rng rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 60));
        std::vector<double> s(n);
        std::vector<int> l(n);
        const bool coarse = trial % 2 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = coarse ? static_cast<double>(uniform_int(rng, 0, 5)) : uniform01(rng);
            l[i] = uniform01(rng) < 0.4 ? 1 : 0;
        }
        l[0] = 1;
        l[1] = 0;
        ASSERT_NEAR(roc_auc(s, l).auc, mann_whitney(s, l), 1e-12);
    }
}

TEST(RocAuc, InvariantUnderMonotoneTransform) {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 50));
        std::vector<double> s(n), t(n);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::round(uniform(rng, -3, 3) * 4) / 4;
            t[i] = std::exp(2 * s[i]) + 7;
            l[i] = static_cast<int>(uniform_int(rng, 0, 1));
        }
        l[0] = 1;
        l[1] = 0;
        const auto a = roc_auc(s, l), b = roc_auc(t, l);
        ASSERT_EQ(a.auc, b.auc);
        ASSERT_EQ(a.points, b.points);
    }
}

TEST(ClassificationMetrics, ConfusionCells) {
    const std::vector<double> pred{69, 94, 81}, act{62, 96, 79};
    const auto m = classification_metrics(pred, act);
    EXPECT_EQ(m.tp, 1);
    EXPECT_EQ(m.tn, 1);
    EXPECT_EQ(m.fn, 1);
    EXPECT_EQ(m.fp, 0);
    EXPECT_DOUBLE_EQ(m.accuracy, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.sensitivity, 0.5);
    EXPECT_DOUBLE_EQ(m.specificity, 1.0);
    // scores -69 and -81 against the positive/negative split
    EXPECT_DOUBLE_EQ(m.auc, 1.0);
}

TEST(ClassificationMetrics, SingleClassLeavesAucUndefined) {
    const std::vector<double> pred{70, 90}, act{60, 70};
    const auto m = classification_metrics(pred, act);
    EXPECT_TRUE(std::isnan(m.auc));
    EXPECT_TRUE(std::isnan(m.specificity));
    EXPECT_DOUBLE_EQ(m.sensitivity, 0.5);
}

TEST(ClassificationMetrics, AccuracyIdentity) {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> p(20), a(20);
        for (auto& v : p) v = uniform(rng, 50, 110);
        for (auto& v : a) v = uniform(rng, 50, 110);
        const auto m = classification_metrics(p, a);
        ASSERT_EQ(m.tp + m.fp + m.tn + m.fn, 20);
        ASSERT_DOUBLE_EQ(m.accuracy, (m.tp + m.tn) / 20.0);
    }
}

TEST(MeanSd, SkipsNaN) {
    const std::vector<double> v{1, std::nan(""), 3};
    const auto [mean, sd] = mean_sd(v);
    EXPECT_DOUBLE_EQ(mean, 2);
    EXPECT_DOUBLE_EQ(sd, std::sqrt(2.0));
}

}  // namespace
}  // namespace stentx
