#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stentx/dataset.hpp"
#include "stentx/features.hpp"
#include "stentx/lasso.hpp"
#include "stentx/models.hpp"

namespace stentx {

enum class FeatureGroup { all, lasso_selected, cle, cle_top20 };
std::string_view to_string(FeatureGroup g);
FeatureGroup parse_feature_group(std::string_view s);

struct PipelineConfig {
    AssemblyOptions assembly;
    FeatureGroup group = FeatureGroup::cle;
    ModelKind model = ModelKind::gpr;
    ModelConfig model_config;
    LassoOptions lasso;
    int top_k = 20;  // for cle_top20
};

/// Everything needed to go from lesion features to predicted areas.
struct FittedPipeline {
    PipelineConfig config;
    std::uint64_t schema_fingerprint = 0;  // of the assembled (pre-selection) schema
    NormalizationParams normalizer;
    std::vector<std::string> selected;  // columns fed to the model, in order
    std::vector<std::string> lasso_ranking;  // empty unless LASSO ran
    RegressionModel model;
};

/// Only the rows of `train` are seen: assembly, normalization, LASSO
/// selection and the model fit all run on them.
FittedPipeline fit_pipeline(std::span<const LesionRecord> train, const PipelineConfig& config, std::uint64_t seed);

/// Normalized, column-selected design for `lesions` under a fitted pipeline.
FeatureMatrix design_matrix(const FittedPipeline& p, std::span<const LesionFeatures> lesions);

struct LesionPrediction {
    std::string lesion_id;
    std::vector<int> frames;              // -1 for lesion-mode rows
    std::vector<double> predicted_area;   // mm^2
    std::vector<double> actual_area;      // NaN when unknown
    ExpansionRecord predicted;            // SEI from the pre-stent references
};

/// Predicted areas over each lesion's stented span and the resulting SEI
/// curve; lesion mode yields a single minimum-area prediction.
std::vector<LesionPrediction> predict_lesions(const FittedPipeline& p, std::span<const LesionRecord> lesions,
                                              double threshold = kDefaultSeiThreshold);

/// Versioned binary container; load refuses files whose schema fingerprint
/// does not match the current feature layout.
void save_pipeline(const FittedPipeline& p, const std::filesystem::path& file);
FittedPipeline load_pipeline(const std::filesystem::path& file);
void write_pipeline(const FittedPipeline& p, std::ostream& out);
FittedPipeline read_pipeline(std::istream& in);

}  // namespace stentx
