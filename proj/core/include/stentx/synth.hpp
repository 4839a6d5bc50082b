#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stentx/dataset.hpp"
#include "stentx/pullback.hpp"

namespace stentx {

struct SurrogateParams {
    double beta = 0.5;
    double thickness_ref_mm = 0.5;
    double depth_ref_mm = 1.0;
    int window_w = 15;
};

/// Generator settings. Defaults describe the desk-scale benchmark: 176 px
/// frames at 0.04 mm/px cover a 7 mm field of view.
struct SynthConfig {
    int n_lesions = 120;
    std::uint64_t seed = 7;
    int image_size_px = 176;
    double pixel_spacing_mm = 0.04;
    double frame_pitch_mm = 0.2;
    int lesion_frames_min = 80;
    int lesion_frames_max = 140;
    int margin_frames = 15;
    double lumen_radius_min_mm = 1.3;
    double lumen_radius_max_mm = 1.8;
    /// Peak fractional area loss of the stenosis.
    double stenosis_min = 0.15;
    double stenosis_max = 0.55;
    double ellipticity_max = 0.1;  // 1 - minor/major
    double calc_probability = 0.9;
    int deposits_min = 2;
    int deposits_max = 4;
    int deposit_frames_min = 5;
    int deposit_frames_max = 30;
    double arc_min_deg = 40;
    double arc_max_deg = 300;
    double arc_jitter = 0.35;
    double frame_dropout = 0.1;
    double thickness_min_mm = 0.2;
    double thickness_max_mm = 0.9;
    double sheet_gap_max_mm = 0.5;
    /// (nodule, protrusion, sheet)
    std::array<double, 3> phenotype_mix = {0.13, 0.23, 0.64};
    /// Multiplies the resistance of each phenotype; all 1 means phenotype
    /// acts only through geometry.
    std::array<double, 3> phenotype_gain = {1.0, 1.0, 1.0};
    double second_lesion_probability = 0.06;
    /// Per-frame noise SD as a fraction of the reference area, unless
    /// noise_sd_mm2 is set.
    double noise_sd_fraction = 0.05;
    std::optional<double> noise_sd_mm2;
    SurrogateParams surrogate;

    /// Variant where phenotype changes the expansion response directly.
    static SynthConfig phenotype_sensitive();
};

/// Throws std::invalid_argument for infeasible settings (including a
/// stenosis that would close the lumen).
void validate(const SynthConfig& c);

/// R(f) = mean over |g - f| <= w (within the sequence) of
/// (theta/360) * min(T/T_ref, 1) * (1 - 0.5 min(D/D_ref, 1));
/// area(f) = ref_area * (1 - beta * min(gain * R(f), 1)).
std::vector<double> surrogate_post_area(std::span<const double> arc_deg, std::span<const double> thickness_mm,
                                        std::span<const double> depth_mm, double ref_area_mm2,
                                        const SurrogateParams& params, double gain = 1.0);

struct SynthLesion {
    Pullback pre;
    std::vector<double> post_areas;      // per frame, with noise inside the stent
    std::vector<double> surrogate;       // noise-free, per frame
    double reference_area_mm2 = 0;
    double noise_sd_mm2 = 0;
};

struct SynthPlanEntry {
    std::string lesion_id;
    std::string patient_id;
    Phenotype phenotype = Phenotype::sheet;
    bool calcified = true;
    std::uint64_t seed = 0;
};

/// Lesion ids, patient grouping and phenotypes for the whole dataset.
std::vector<SynthPlanEntry> plan_dataset(const SynthConfig& c);

SynthLesion generate_lesion(const SynthConfig& c, const SynthPlanEntry& plan);

/// In-memory dataset: lesions are generated and reduced to records one at a
/// time. noise_sd holds each lesion's generator noise SD.
struct SynthDataset {
    std::vector<LesionRecord> records;
    std::vector<double> noise_sd;
};
SynthDataset synthesize_records(const SynthConfig& c);

/// Writes lesions/<id>/pre/, truth.csv and config_echo.json under `out`.
void generate_dataset(const SynthConfig& c, const std::filesystem::path& out);

/// JSON text of every configuration field.
std::string config_json(const SynthConfig& c);

}  // namespace stentx
