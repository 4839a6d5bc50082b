#pragma once

#include "stentx/pullback.hpp"

namespace stentx {

/// Volumetric lumen measurements over the lesion frames.
struct LumenLesionFeatures {
    double volume_mm3 = 0;
    double equivalent_diameter_mm = 0;
    double extent = 0;
    double convex_volume_mm3 = 0;
    double solidity = 0;
    double surface_area_mm2 = 0;
};

/// Volumetric calcification measurements. Volume and surface cover every
/// deposit; extent, convex volume, solidity and equivalent diameter describe
/// the longest deposit (largest frame span).
struct CalcLesionFeatures {
    double volume_mm3 = 0;
    double volume_index_mm3_per_mm = 0;
    double length_mm = 0;
    double equivalent_diameter_mm = 0;
    double extent = 0;
    double convex_volume_mm3 = 0;
    double solidity = 0;
    double surface_area_mm2 = 0;
    int num_deposits = 0;
    double calc_pct = 0;
};

LumenLesionFeatures compute_lumen_lesion_features(const Pullback& pullback);
CalcLesionFeatures compute_calc_lesion_features(const Pullback& pullback);

/// (6V/pi)^(1/3)
double equivalent_diameter(double volume);

/// One 26-connected calcification deposit within the lesion.
struct Deposit {
    int first_frame = 0;  // pullback frame index
    int last_frame = 0;
    std::size_t voxels = 0;
};
std::vector<Deposit> find_deposits(const Pullback& pullback);

}  // namespace stentx
