#pragma once

#include <span>

#include "stentx/features.hpp"

namespace stentx {

/// Rule constants of the calcium score; defaults 180 deg / 0.5 mm / 5 mm
/// for 2 / 1 / 1 points, high risk at 4 points.
struct FujinoConfig {
    double angle_deg = 180;
    double thickness_mm = 0.5;
    double length_mm = 5;
    int angle_points = 2;
    int thickness_points = 1;
    int length_points = 1;
    int high_risk_points = 4;
};

struct FujinoScore {
    int points = 0;
    int angle_points = 0;
    int thickness_points = 0;
    int length_points = 0;
    bool high_risk = false;
};

/// Strict comparisons: a value equal to its threshold earns no points.
FujinoScore fujino_score(double max_angle_deg, double max_thickness_mm, double calc_length_mm,
                         const FujinoConfig& config = {});

/// Score of a lesion from its largest per-frame arc and thickness and its
/// calcification length.
FujinoScore fujino_score(const LesionFeatures& lesion, const FujinoConfig& config = {});

/// One row per lesion with columns calc_max_arc_angle, calc_max_thickness,
/// calc_length; target is the lesion's minimum post-stent area when known.
FeatureMatrix fujino_ml_features(std::span<const LesionFeatures> lesions);

}  // namespace stentx
