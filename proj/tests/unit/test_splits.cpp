#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stentx/rng.hpp"
#include "stentx/splits.hpp"

namespace stentx {
namespace {

std::vector<std::string> patients(int n) {
    std::vector<std::string> g;
    for (int i = 0; i < n; ++i) g.push_back("P" + std::to_string(i));
    return g;
}

TEST(GroupedKFold, TenPatientsFiveFolds) {
    const auto g = patients(10);
    const auto f = split_grouped_kfold(g, 5, 1);
    for (int k = 0; k < 5; ++k) EXPECT_EQ(f.validation_indices(k).size(), 2u);
}

TEST(GroupedKFold, PatientLesionsShareFold) {
    std::vector<std::string> g = patients(6);
    g.push_back("P3");
    const auto f = split_grouped_kfold(g, 3, 2);
    EXPECT_EQ(f.fold[3], f.fold[6]);
}

TEST(GroupedKFold, Errors) {
    const auto g = patients(3);
    EXPECT_THROW(split_grouped_kfold(g, 4, 0), std::invalid_argument);
    EXPECT_THROW(split_grouped_kfold(g, 1, 0), std::invalid_argument);
}

TEST(GroupedKFold, Properties) {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const int n_patients = static_cast<int>(uniform_int(rng, 2, 40));
        const int k = static_cast<int>(uniform_int(rng, 2, n_patients));
        std::vector<std::string> g;
        for (int p = 0; p < n_patients; ++p)
            for (int l = 0, nl = static_cast<int>(uniform_int(rng, 1, 3)); l < nl; ++l) g.push_back("P" + std::to_string(p));
        const std::uint64_t seed = rng();
        const auto f = split_grouped_kfold(g, k, seed);
        ASSERT_EQ(f.fold, split_grouped_kfold(g, k, seed).fold);

        std::map<std::string, int> fold_of;
        std::vector<std::set<std::string>> members(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto [it, inserted] = fold_of.emplace(g[i], f.fold[i]);
            ASSERT_EQ(it->second, f.fold[i]) << "patient spans folds";
            members[static_cast<std::size_t>(f.fold[i])].insert(g[i]);
        }
        std::size_t lo = g.size(), hi = 0, seen = 0;
        for (int v = 0; v < k; ++v) {
            lo = std::min(lo, members[static_cast<std::size_t>(v)].size());
            hi = std::max(hi, members[static_cast<std::size_t>(v)].size());
            const auto va = f.validation_indices(v), tr = f.train_indices(v);
            ASSERT_EQ(va.size() + tr.size(), g.size());
            seen += va.size();
        }
        ASSERT_LE(hi - lo, 1u);
        ASSERT_EQ(seen, g.size()) << "each item in exactly one validation fold";
    }
}

TEST(Holdout, PaperScaleCounts) {
    const auto g = patients(110);
    const auto s = holdout_split(g, kDefaultTrainFraction, 7);
    EXPECT_EQ(s.train.size(), 78u);
    EXPECT_EQ(s.heldout.size(), 32u);
}

TEST(Holdout, KeepsPatientsWhole) {
    Rng rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> g;
        for (int p = 0; p < 30; ++p)
            for (int l = 0, nl = static_cast<int>(uniform_int(rng, 1, 3)); l < nl; ++l) g.push_back("P" + std::to_string(p));
        const auto s = holdout_split(g, 0.7, rng());
        std::set<std::string> train;
        for (auto i : s.train) train.insert(g[i]);
        for (auto i : s.heldout) ASSERT_FALSE(train.count(g[i]));
        ASSERT_EQ(s.train.size() + s.heldout.size(), g.size());
    }
}

}  // namespace
}  // namespace stentx
