#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "stentx/rng.hpp"
#include "stentx/stats.hpp"

namespace stentx {
namespace {

TEST(Summarize, ConstantInputIsDegenerate) {
    const std::vector<double> v{2, 2, 2, 2};
    const auto s = summarize(v);
    EXPECT_EQ(s.mean, 2);
    EXPECT_EQ(s.sd, 0);
    EXPECT_EQ(s.skewness, 0);
    EXPECT_EQ(s.kurtosis, 0);
}

TEST(Summarize, ThreeValues) {
    const std::vector<double> v{1, 2, 3};
    const auto s = summarize(v);
    EXPECT_DOUBLE_EQ(s.mean, 2);
    EXPECT_DOUBLE_EQ(s.median, 2);
    EXPECT_DOUBLE_EQ(s.sd, 1);
    EXPECT_NEAR(s.skewness, 0, 1e-15);
    EXPECT_DOUBLE_EQ(s.kurtosis, 1.5);
}

TEST(Summarize, SkewedSample) {
    // m2 = 3/16, m3 = 3/32, m4 = 21/256
    const std::vector<double> v{0, 0, 0, 1};
    const auto s = summarize(v);
    EXPECT_NEAR(s.skewness, 1.1547005383792515, 1e-12);
    EXPECT_NEAR(s.kurtosis, 7.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(s.median, 0);
    EXPECT_DOUBLE_EQ(s.max, 1);
}

TEST(Summarize, SingleValue) {
    const std::vector<double> v{4.5};
    const auto s = summarize(v);
    EXPECT_EQ(s.sd, 0);
    EXPECT_EQ(s.median, 4.5);
}

TEST(Summarize, EmptyThrows) { EXPECT_THROW(summarize({}), std::invalid_argument); }

TEST(Summarize, MatchesLongDoubleOracle) {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 60));
        std::vector<double> v(n);
        for (auto& x : v) x = uniform(rng, -50, 50);

        long double mean = 0;
        for (double x : v) mean += x;
        mean /= n;
        long double m2 = 0, m3 = 0, m4 = 0;
        for (double x : v) {
            const long double d = x - mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        const long double sd = n > 1 ? std::sqrt(m2 / (n - 1)) : 0;
        m2 /= n;
        m3 /= n;
        m4 /= n;
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

        const auto s = summarize(v);
        ASSERT_NEAR(s.mean, static_cast<double>(mean), 1e-12);
        ASSERT_NEAR(s.sd, static_cast<double>(sd), 1e-12);
        ASSERT_EQ(s.median, median);
        ASSERT_EQ(s.min, sorted.front());
        ASSERT_EQ(s.max, sorted.back());
        if (n > 1) {
            ASSERT_NEAR(s.skewness, static_cast<double>(m3 / std::pow(m2, 1.5L)), 1e-12);
            ASSERT_NEAR(s.kurtosis, static_cast<double>(m4 / (m2 * m2)), 1e-12);
        }
        ASSERT_LE(s.min, s.median);
        ASSERT_LE(s.median, s.max);
    }
}

}  // namespace
}  // namespace stentx
