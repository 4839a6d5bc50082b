#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stentx/dataset.hpp"
#include "stentx/fujino.hpp"
#include "stentx/metrics.hpp"
#include "stentx/pipeline.hpp"
#include "stentx/splits.hpp"

namespace stentx {

struct ExperimentConfig {
    PipelineConfig pipeline;
    std::uint64_t seed = 7;
    int folds = 5;
    double train_fraction = kDefaultTrainFraction;
    double threshold = kDefaultSeiThreshold;
    FujinoConfig fujino;
    bool baselines = true;
    std::string data_source;  // echoed only
};

struct FoldResult {
    int fold = 0;
    std::vector<std::string> train_lesions;
    std::vector<std::string> validation_lesions;
    RegressionMetrics regression;
    ClassificationMetrics classification;
    std::uint64_t normalizer_fingerprint = 0;
    std::vector<std::string> selected;
    double fujino_rule_auc = 0;
    double fujino_ml_auc = 0;
};

struct LesionOutcome {
    std::string lesion_id;
    std::string patient_id;
    std::string phenotype;  // empty when unknown
    double actual_msei = 0;
    double predicted_msei = 0;
    int fujino_points = 0;
    double fujino_ml_msei = 0;
};

struct BaselineSummary {
    std::vector<double> fold_auc;
    std::pair<double, double> cv_auc{0, 0};  // mean, SD
    ClassificationMetrics heldout;
};

/// Summary of one configuration: CV inside the training lesions, then a
/// refit on all of them scored once on the held-out lesions.
struct ExperimentReport {
    ExperimentConfig config;
    std::vector<std::string> train_lesions;
    std::vector<std::string> heldout_lesions;
    std::vector<FoldResult> folds;
    std::pair<double, double> cv_rmse, cv_pearson, cv_bias, cv_auc, cv_accuracy;
    RegressionMetrics heldout_regression;
    ClassificationMetrics heldout_classification;
    std::vector<LesionOutcome> heldout_outcomes;
    std::vector<LesionPrediction> heldout_predictions;
    BaselineSummary fujino_rule;
    BaselineSummary fujino_ml;
    std::uint64_t final_normalizer_fingerprint = 0;
    std::vector<std::string> final_selected;
    std::vector<std::string> lasso_ranking;
};

/// Every lesion needs measured post-stent areas. Errors surface as
/// StageError naming the failing step.
ExperimentReport run_experiment(std::span<const LesionRecord> lesions, const ExperimentConfig& config);

/// Deterministic JSON (sorted keys, no timestamps).
std::string report_json(const ExperimentReport& report);
std::string config_echo_json(const ExperimentConfig& config);

/// report.json, heldout_lesions.csv, heldout_predictions.csv and the SVG
/// plots (scatter, residuals, msei_bars, lumen_curves, roc) under `dir`.
void write_report(const ExperimentReport& report, std::span<const LesionRecord> lesions,
                  const std::filesystem::path& dir);

}  // namespace stentx
