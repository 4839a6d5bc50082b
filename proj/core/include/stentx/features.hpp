#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stentx/geometry2d.hpp"
#include "stentx/geometry3d.hpp"
#include "stentx/pullback.hpp"

namespace stentx {

enum class AssemblyMode { frame, segmental, lesion };
std::string_view to_string(AssemblyMode m);
AssemblyMode parse_mode(std::string_view s);

enum class ColumnGroup { lumen2d, calc2d, lumen3d, calc3d, phenotype };

struct FeatureColumn {
    std::string name;
    ColumnGroup group = ColumnGroup::lumen2d;
    /// Absolute areas/volumes bypass [0,1] normalization.
    bool exempt = false;
};

class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<FeatureColumn> columns);

    std::size_t size() const noexcept { return columns_.size(); }
    const FeatureColumn& operator[](std::size_t i) const { return columns_[i]; }
    const std::vector<FeatureColumn>& columns() const noexcept { return columns_; }
    std::vector<std::string> names() const;
    std::optional<std::size_t> index_of(std::string_view name) const;

    /// Columns in the order given; throws std::invalid_argument on unknown names.
    FeatureSchema subset(std::span<const std::string> names) const;

    /// FNV-1a over the ordered column names.
    std::uint64_t fingerprint() const;

    bool operator==(const FeatureSchema& o) const { return names() == o.names(); }

private:
    std::vector<FeatureColumn> columns_;
};

/// Instance x feature table with per-row target and provenance.
struct FeatureMatrix {
    FeatureSchema schema;
    Eigen::MatrixXd values;
    std::vector<double> target;
    std::vector<std::string> group_id;  // patient
    std::vector<std::string> lesion_id;
    std::vector<int> frame_index;  // -1 for lesion-mode rows

    std::size_t rows() const { return target.size(); }
    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
    FeatureMatrix select_columns(std::span<const std::string> names) const;
    Eigen::Map<const Eigen::VectorXd> target_vector() const {
        return {target.data(), static_cast<Eigen::Index>(target.size())};
    }
};

/// Everything the assembler needs about one lesion; no image data.
struct LesionFeatures {
    std::string lesion_id;
    std::string patient_id;
    std::optional<Phenotype> phenotype;
    int lesion_start = 0;  // pullback frame index of frames[0]
    int stent_start = 0;   // pullback frame indices, inclusive
    int stent_end = 0;
    std::vector<FrameFeatures> frames;  // lesion frames only
    LumenLesionFeatures lumen3d;
    CalcLesionFeatures calc3d;
    /// Registered post-stent lumen area per pullback frame (NaN = unknown);
    /// empty at prediction time.
    std::vector<double> post_areas;

    int lesion_end() const { return lesion_start + static_cast<int>(frames.size()) - 1; }
    /// Frames of the stented span that lie inside the lesion.
    std::pair<int, int> row_span() const;
};

struct AssemblyOptions {
    AssemblyMode mode = AssemblyMode::segmental;
    int segment_length = 31;
    bool include_phenotype = false;
};

/// Names of the 24 per-frame 2D features, lumen first.
const std::vector<std::string>& frame_feature_names();
/// Per-frame values in frame_feature_names() order.
std::vector<double> frame_feature_values(const FrameFeatures& f);

FeatureSchema make_schema(const AssemblyOptions& opt);

/// Throws std::invalid_argument for even segment lengths and DataError for
/// inconsistent lesion inputs (target vectors not aligned to the pullback).
FeatureMatrix assemble(std::span<const LesionFeatures> lesions, const AssemblyOptions& opt);

/// Calcification lesion expansion (CLE) selection for the given layout.
std::vector<std::string> cle_columns(const AssemblyOptions& opt);

/// Per-column min/max learned from training rows.
struct NormalizationParams {
    std::vector<std::string> names;
    std::vector<double> min;
    std::vector<double> max;
    std::vector<bool> exempt;
    std::vector<std::string> warnings;

    std::uint64_t fingerprint() const;
};

NormalizationParams fit_normalizer(const FeatureMatrix& train);
/// Maps train min->0, max->1, clamps to [-0.5, 1.5]; exempt columns pass through.
FeatureMatrix apply_normalizer(const NormalizationParams& params, const FeatureMatrix& m);

/// Header of column names then `target,lesion_id,patient_id,frame_index`.
void write_csv(const FeatureMatrix& m, std::ostream& out);

/// Shortest round-trip decimal rendering used by all CSV writers.
std::string format_number(double v);

}  // namespace stentx
