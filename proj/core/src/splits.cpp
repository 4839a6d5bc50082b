#include "stentx/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "stentx/rng.hpp"

namespace stentx {

namespace {

// Distinct groups in sorted order, shuffled by seed, with their member items.
std::vector<std::vector<std::size_t>> shuffled_groups(std::span<const std::string> ids, std::uint64_t seed) {
    std::map<std::string, std::vector<std::size_t>> by_group;
    for (std::size_t i = 0; i < ids.size(); ++i) by_group[ids[i]].push_back(i);
    std::vector<std::vector<std::size_t>> groups;
    groups.reserve(by_group.size());
    for (auto& [id, members] : by_group) groups.push_back(std::move(members));
    Rng rng(seed);
    shuffle(groups.begin(), groups.end(), rng);
    return groups;
}

}  // namespace

std::vector<std::size_t> FoldAssignment::train_indices(int f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold.size(); ++i)
        if (fold[i] != f) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldAssignment::validation_indices(int f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold.size(); ++i)
        if (fold[i] == f) out.push_back(i);
    return out;
}

FoldAssignment split_grouped_kfold(std::span<const std::string> group_ids, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k-fold split needs k >= 2");
    const auto groups = shuffled_groups(group_ids, seed);
    if (groups.size() < static_cast<std::size_t>(k))
        throw std::invalid_argument("only " + std::to_string(groups.size()) + " patients for " + std::to_string(k) +
                                    " folds");
    FoldAssignment a;
    a.k = k;
    a.fold.assign(group_ids.size(), -1);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (auto i : groups[g]) a.fold[i] = static_cast<int>(g % static_cast<std::size_t>(k));
    return a;
}

HoldoutSplit holdout_split(std::span<const std::string> group_ids, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0 && train_fraction < 1))
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    const auto target = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(group_ids.size())));
    HoldoutSplit s;
    for (const auto& g : shuffled_groups(group_ids, seed)) {
        auto& dst = s.train.size() + g.size() <= target ? s.train : s.heldout;
        dst.insert(dst.end(), g.begin(), g.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.heldout.begin(), s.heldout.end());
    return s;
}

}  // namespace stentx
