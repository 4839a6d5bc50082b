#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stentx {

/// Fold index per item; every item of one group shares a fold.
struct FoldAssignment {
    int k = 0;
    std::vector<int> fold;

    /// Item indices outside / inside fold `f`.
    std::vector<std::size_t> train_indices(int f) const;
    std::vector<std::size_t> validation_indices(int f) const;
};

/// Groups are shuffled with `seed` and dealt round-robin, so fold sizes
/// differ by at most one group. Throws std::invalid_argument when k < 2 or
/// there are fewer groups than folds.
FoldAssignment split_grouped_kfold(std::span<const std::string> group_ids, int k, std::uint64_t seed);

inline constexpr double kDefaultTrainFraction = 78.0 / 110.0;

struct HoldoutSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> heldout;
};

/// Whole groups go to training, in shuffled order, while they fit within
/// round(train_fraction * n) items; the rest are held out.
HoldoutSplit holdout_split(std::span<const std::string> group_ids, double train_fraction, std::uint64_t seed);

}  // namespace stentx
