#pragma once

#include <span>
#include <utility>
#include <vector>

#include "stentx/expansion.hpp"

namespace stentx {

struct RegressionMetrics {
    double rmse_mm2 = 0;
    double pearson_r = 0;
    double bias_mm2 = 0;         // mean(predicted - actual)
    double residual_sd_mm2 = 0;  // sample SD of predicted - actual
    bool pearson_undefined = false;
    std::size_t n = 0;
};

/// Throws std::invalid_argument on empty or unequal inputs. A zero-variance
/// input sets pearson_r = 0 and pearson_undefined.
RegressionMetrics regression_metrics(std::span<const double> actual, std::span<const double> predicted);

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr) from (0,0) to (1,1)
    double auc = 0;
};

/// Threshold sweep over unique scores (higher = more positive), trapezoid
/// area; tied scores contribute half credit. Throws std::invalid_argument
/// when only one class is present.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

struct ClassificationMetrics {
    double accuracy = 0;
    double sensitivity = 0;  // NaN without positives
    double specificity = 0;  // NaN without negatives
    double auc = 0;          // NaN for single-class input
    int tp = 0, fp = 0, tn = 0, fn = 0;
    std::vector<std::pair<double, double>> roc_points;
};

/// Positive = under-expanded (msei < threshold); the ROC score is -predicted msei.
ClassificationMetrics classification_metrics(std::span<const double> predicted_msei,
                                             std::span<const double> actual_msei,
                                             double threshold = kDefaultSeiThreshold);

/// Mean and sample SD of the finite entries; NaN when none are finite.
std::pair<double, double> mean_sd(std::span<const double> values);

}  // namespace stentx
