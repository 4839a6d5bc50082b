#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stentx/expansion.hpp"
#include "stentx/features.hpp"
#include "stentx/pullback.hpp"

namespace stentx {

/// Image-free summary of one lesion: its features, the pre-stent reference
/// pair used to turn predicted areas into SEI, and the measured expansion
/// when post-stent areas are known.
struct LesionRecord {
    LesionFeatures features;
    ReferencePair pre_refs;
    std::optional<ExpansionRecord> actual;
};

/// Extracts every per-frame and lesion feature of `pre`. The stent span is
/// taken from the metadata, falling back to the lesion bounds. `post_areas`
/// (one value per pre frame, NaN if unknown) may be empty.
LesionRecord extract_lesion(const Pullback& pre, std::span<const double> post_areas = {},
                            std::optional<std::string> lesion_id = std::nullopt);

/// Reads `key=value` lines `z_offset_frames` and `rotation_deg`.
RegistrationTransform read_registration(const std::filesystem::path& file);

/// Loads `<dir>/lesions/<id>/pre`; targets come from `<id>/post` plus
/// `<id>/registration.txt` when present, else from `<dir>/truth.csv`, else
/// are left empty. Lesions are visited in directory-name order and images
/// are released after each lesion.
std::vector<LesionRecord> load_dataset(const std::filesystem::path& dir);

struct TruthRow {
    std::string lesion_id;
    int frame = 0;
    double post_area_mm2 = 0;
    std::string phenotype;
};
std::vector<TruthRow> read_truth_csv(const std::filesystem::path& file);

std::vector<LesionFeatures> lesion_features(std::span<const LesionRecord> records);

}  // namespace stentx
