#pragma once

#include <array>
#include <optional>

#include "stentx/pullback.hpp"

namespace stentx {

/// 2D lumen measurements of one frame (mm / mm^2).
struct LumenFrameFeatures {
    double area_mm2 = 0;
    double pct_area_stenosis = 0;
    double major_axis_mm = 0;
    double minor_axis_mm = 0;
    double perimeter_mm = 0;
    double extent = 0;
    double eccentricity = 0;
    double solidity = 0;
    double circularity = 0;
    bool below_ref_050 = false;
    bool below_ref_070 = false;
    bool below_ref_090 = false;
};

/// 2D calcification measurements of one frame. Ray quantities (arc,
/// thickness, depth) and area use all calcified pixels; shape descriptors
/// use the largest 8-connected component.
struct CalcFrameFeatures {
    bool present = false;
    double max_arc_angle_deg = 0;
    double max_thickness_mm = 0;
    double max_depth_mm = 0;
    double area_mm2 = 0;
    double major_axis_mm = 0;
    double minor_axis_mm = 0;
    double perimeter_mm = 0;
    double extent = 0;
    double eccentricity = 0;
    double solidity = 0;
    double circularity = 0;
    double stretch_ratio = 1;
};

struct FrameFeatures {
    LumenFrameFeatures lumen;
    CalcFrameFeatures calc;
};

/// Throws DataError if the mask has no lumen; `frame_index` is reported.
LumenFrameFeatures compute_lumen_frame_features(const FrameMask& mask, double pixel_spacing_mm,
                                                double reference_area_mm2, int frame_index = -1);

CalcFrameFeatures compute_calc_frame_features(const FrameMask& mask, double pixel_spacing_mm,
                                              int frame_index = -1);

/// Per-ray hit pattern used for the arc/thickness/depth measurements;
/// exposed for tests and diagnostics.
struct RayProfile {
    static constexpr int kRays = 360;
    std::array<bool, kRays> hits{};
    std::array<double, kRays> thickness_px{};
    std::array<double, kRays> depth_px{};
    double origin_x = 0;
    double origin_y = 0;
};
RayProfile cast_rays(const FrameMask& mask);

/// Longest circular run of `true` entries (degrees, since rays are 1 degree apart).
int longest_circular_run(const std::array<bool, RayProfile::kRays>& hits);

}  // namespace stentx
